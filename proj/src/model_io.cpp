#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "warmstop/io.hpp"
#include "warmstop/rocket.hpp"

namespace warmstop {

namespace {

constexpr char kMagic[8] = {'W', 'S', 'R', 'O', 'C', 'K', 'E', 'T'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void doubles(const std::vector<double>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (double x : v) f64(x);
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<unsigned char> take() { return std::move(bytes_); }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> doubles(std::size_t max_count) {
    const auto n = u32();
    if (n > max_count) throw ModelFormatError("corrupt model file: implausible vector length");
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  bool starts_with(const char* magic, std::size_t n) const {
    return bytes_.size() >= n && std::memcmp(bytes_.data(), magic, n) == 0;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw ModelFormatError("corrupt model file: truncated");
  }
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> serialize_model(const RocketModel& model) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.window));
  w.u64(model.seed);
  w.u32(static_cast<std::uint32_t>(model.kernels.size()));
  for (const auto& k : model.kernels) {
    w.u32(static_cast<std::uint32_t>(k.dilation));
    w.u32(static_cast<std::uint32_t>(k.padding));
    w.f64(k.bias);
    w.doubles(k.weights);
  }
  w.f64(model.alpha);
  w.f64(model.intercept);
  w.doubles(model.feature_stats.mean);
  w.doubles(model.feature_stats.scale);
  w.doubles(model.weights);
  return w.take();
}

RocketModel deserialize_model(std::span<const unsigned char> bytes, std::optional<int> expected_window) {
  Reader r(bytes);
  if (!r.starts_with(kMagic, sizeof kMagic)) throw ModelFormatError("not a model file: bad magic header");
  r.skip(sizeof kMagic);
  const auto version = r.u32();
  if (version != kModelFormatVersion) {
    throw ModelFormatError("unsupported model version " + std::to_string(version) + " (expected " +
                           std::to_string(kModelFormatVersion) + ")");
  }

  RocketModel m;
  m.window = static_cast<int>(r.u32());
  if (expected_window && m.window != *expected_window) {
    throw ModelFormatError("window mismatch: model expects " + std::to_string(m.window) + ", runtime uses " +
                           std::to_string(*expected_window));
  }
  m.seed = r.u64();
  const auto count = r.u32();
  if (count > (1u << 24)) throw ModelFormatError("corrupt model file: implausible kernel count");
  m.kernels.resize(count);
  for (auto& k : m.kernels) {
    k.dilation = static_cast<int>(r.u32());
    k.padding = static_cast<int>(r.u32());
    k.bias = r.f64();
    k.weights = r.doubles(64);
    if (k.weights.empty() || k.dilation < 1) throw ModelFormatError("corrupt model file: invalid kernel");
  }
  m.alpha = r.f64();
  m.intercept = r.f64();
  const std::size_t features = 2 * static_cast<std::size_t>(count);
  m.feature_stats.mean = r.doubles(features);
  m.feature_stats.scale = r.doubles(features);
  m.weights = r.doubles(features);
  if (m.feature_stats.mean.size() != features || m.feature_stats.scale.size() != features ||
      m.weights.size() != features) {
    throw ModelFormatError("corrupt model file: feature count mismatch");
  }
  if (!r.done()) throw ModelFormatError("corrupt model file: trailing bytes");
  return m;
}

void save_model(const RocketModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  io::write_atomically(path, [&](std::ostream& out) {
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  });
}

RocketModel load_model(const std::filesystem::path& path, std::optional<int> expected_window) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes, expected_window);
}

}  // namespace warmstop
