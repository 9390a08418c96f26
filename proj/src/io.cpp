#include "warmstop/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace warmstop::io {

using nlohmann::json;

json ArtifactHeader::to_json() const {
  json h = extra;
  h["format"] = format;
  h["version"] = kToolVersion;
  h["seed"] = seed;
  return h;
}

void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& write) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
      write(out);
      out.flush();
      if (!out) throw DataError("failed writing " + path.string());
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

namespace {

// Calls `on_record` for each non-header JSON line.
void for_each_record(const fs::path& path, const std::function<void(const json&, std::size_t)>& on_record) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed record");
    }
    if (record.contains("format")) continue;
    try {
      on_record(record, line_no);
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

BenchmarkId id_from(const json& r) {
  return {r.at("project").get<std::string>(), r.at("benchmark").get<std::string>(), r.at("fork").get<int>()};
}

json id_to(const BenchmarkId& id) { return {{"project", id.project}, {"benchmark", id.benchmark}, {"fork", id.fork}}; }

}  // namespace

std::vector<MeasurementSeries> read_corpus(const fs::path& path) {
  std::vector<MeasurementSeries> corpus;
  for_each_record(path, [&](const json& r, std::size_t) {
    MeasurementSeries s;
    s.id = id_from(r);
    s.iteration_duration = r.value("iteration_duration_s", 1.0);
    s.values = r.at("values").get<std::vector<double>>();
    corpus.push_back(std::move(s));
  });
  return corpus;
}

void write_corpus(const fs::path& path, const std::vector<MeasurementSeries>& corpus, const ArtifactHeader& header) {
  write_atomically(path, [&](std::ostream& out) {
    out << header.to_json().dump() << '\n';
    for (const auto& s : corpus) {
      json r = id_to(s.id);
      r["iteration_duration_s"] = s.iteration_duration;
      r["values"] = s.values;
      out << r.dump() << '\n';
    }
  });
}

AnnotationMap read_annotations(const fs::path& path) {
  AnnotationMap out;
  for_each_record(path, [&](const json& r, std::size_t) {
    const auto& st = r.at("st");
    out[id_from(r)] = st.is_null() ? SteadyStateAnnotation::never() : SteadyStateAnnotation::at(st.get<int>());
  });
  return out;
}

void write_annotations(const fs::path& path, const AnnotationMap& annotations, const ArtifactHeader& header) {
  write_atomically(path, [&](std::ostream& out) {
    out << header.to_json().dump() << '\n';
    for (const auto& [id, a] : annotations) {
      json r = id_to(id);
      r["st"] = a.st ? json(*a.st) : json(nullptr);
      out << r.dump() << '\n';
    }
  });
}

SegmentDataset read_dataset(const fs::path& path) {
  SegmentDataset ds;
  for_each_record(path, [&](const json& r, std::size_t) {
    LabeledSegment item;
    item.segment.source = id_from(r);
    item.segment.start = r.at("start").get<int>();
    item.segment.values = r.at("values").get<std::vector<double>>();
    item.label = label_from_string(r.at("label").get<std::string>());
    if (r.contains("fold")) ds.fold_assignment[item.segment.source.benchmark] = r.at("fold").get<int>();
    ds.items.push_back(std::move(item));
  });
  return ds;
}

void write_dataset(const fs::path& path, const SegmentDataset& dataset, const ArtifactHeader& header) {
  write_atomically(path, [&](std::ostream& out) {
    out << header.to_json().dump() << '\n';
    for (const auto& item : dataset.items) {
      json r = id_to(item.segment.source);
      r["start"] = item.segment.start;
      r["label"] = to_string(item.label);
      auto fold = dataset.fold_assignment.find(item.segment.source.benchmark);
      if (fold != dataset.fold_assignment.end()) r["fold"] = fold->second;
      r["values"] = item.segment.values;
      out << r.dump() << '\n';
    }
  });
}

std::map<std::string, int> read_fold_map(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    const json doc = json::parse(in);
    return doc.at("folds").get<std::map<std::string, int>>();
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed fold map");
  }
}

void write_fold_map(const fs::path& path, const std::map<std::string, int>& folds, const ArtifactHeader& header) {
  write_atomically(path, [&](std::ostream& out) {
    json doc = header.to_json();
    doc["folds"] = folds;
    out << doc.dump(2) << '\n';
  });
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::map<std::string, std::string>> rows;
  std::vector<std::string> columns;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv(line);
    if (columns.empty()) {
      columns = std::move(fields);
      continue;
    }
    if (fields.size() != columns.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns.size()) +
                      " fields");
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < columns.size(); ++i) row[columns[i]] = fields[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

const std::string& field(const std::map<std::string, std::string>& row, const std::string& key) {
  auto it = row.find(key);
  if (it == row.end()) throw DataError("missing column '" + key + "'");
  return it->second;
}

int int_field(const std::map<std::string, std::string>& row, const std::string& key) {
  const auto& text = field(row, key);
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("column '" + key + "': '" + text + "' is not an integer");
  }
  return v;
}

}  // namespace

SopConfig read_sop_config(const fs::path& path) {
  SopConfig sop;
  for (const auto& row : read_csv(path)) {
    SopEntry e{int_field(row, "warmup"), int_field(row, "measurement"), int_field(row, "forks")};
    if (e.warmup_iterations < 0 || e.measurement_iterations < 0 || e.forks < 0) {
      throw DataError(path.string() + ": SOP counts must be >= 0");
    }
    sop[field(row, "benchmark")] = e;
  }
  return sop;
}

void write_sop_config(const fs::path& path, const SopConfig& sop, const std::map<std::string, std::string>& projects,
                      const ArtifactHeader& header) {
  write_atomically(path, [&](std::ostream& out) {
    out << "# " << header.to_json().dump() << '\n';
    out << "project,benchmark,warmup,measurement,forks\n";
    for (const auto& [bench, e] : sop) {
      auto p = projects.find(bench);
      out << (p == projects.end() ? std::string() : p->second) << ',' << bench << ',' << e.warmup_iterations << ','
          << e.measurement_iterations << ',' << e.forks << '\n';
    }
  });
}

std::vector<ResultRow> read_results(const fs::path& path) {
  std::vector<ResultRow> rows;
  for (const auto& row : read_csv(path)) {
    ResultRow r;
    r.id = {field(row, "project"), field(row, "benchmark"), int_field(row, "fork")};
    r.warmup_iterations = int_field(row, "warmup_iterations");
    r.halt_reason = halt_reason_from_string(field(row, "halt_reason"));
    r.queries = int_field(row, "queries");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_results(const fs::path& path, const std::vector<ResultRow>& rows, const ArtifactHeader& header) {
  write_atomically(path, [&](std::ostream& out) {
    out << "# " << header.to_json().dump() << '\n';
    out << "project,benchmark,fork,warmup_iterations,halt_reason,queries\n";
    for (const auto& r : rows) {
      out << r.id.project << ',' << r.id.benchmark << ',' << r.id.fork << ',' << r.warmup_iterations << ','
          << to_string(r.halt_reason) << ',' << r.queries << '\n';
    }
  });
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

}  // namespace warmstop::io
