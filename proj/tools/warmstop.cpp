#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "warmstop/baselines.hpp"
#include "warmstop/core_data.hpp"
#include "warmstop/io.hpp"
#include "warmstop/pipeline.hpp"
#include "warmstop/rocket.hpp"
#include "warmstop/segmentation.hpp"
#include "warmstop/steady_state.hpp"
#include "warmstop/stopper.hpp"
#include "warmstop/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace warmstop;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

// ---- shared plumbing ------------------------------------------------------

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  json config = json::object();

  const json& section(const char* name) const {
    static const json empty = json::object();
    auto it = config.find(name);
    return it == config.end() ? empty : *it;
  }
};

// Takes a value from the config file unless the flag was given explicitly.
template <class T>
void from_config(const json& section, const char* key, const CLI::Option* opt, T& target) {
  if (opt && opt->count() > 0) return;
  auto it = section.find(key);
  if (it == section.end()) return;
  try {
    target = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

void load_config(Globals& g) {
  if (g.config_path.empty()) return;
  std::ifstream in(g.config_path);
  if (!in) throw ConfigError("cannot open config " + g.config_path);
  try {
    g.config = json::parse(in);
  } catch (const json::exception&) {
    throw ConfigError("config " + g.config_path + " is not valid JSON");
  }
  if (!g.config.is_object()) throw ConfigError("config must be a JSON object");
  if (g.config.contains("seed")) g.seed = g.config.at("seed").get<std::uint64_t>();
}

void require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw DataError("input not found: " + p.string());
}

// Removes outputs created by a command that did not finish.
class OutputGuard {
 public:
  void track(const fs::path& p) {
    if (!fs::exists(p)) created_.push_back(p);
  }
  void commit() { committed_ = true; }
  ~OutputGuard() {
    if (committed_) return;
    for (auto it = created_.rbegin(); it != created_.rend(); ++it) {
      std::error_code ec;
      fs::remove_all(*it, ec);
    }
  }

 private:
  std::vector<fs::path> created_;
  bool committed_ = false;
};

json hash_inputs(const std::vector<fs::path>& inputs) {
  json out = json::object();
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out[f.string()] = io::sha256_file(f);
    } else {
      out[p.string()] = io::sha256_file(p);
    }
  }
  return out;
}

fs::path manifest_path(const fs::path& out) {
  if (fs::is_directory(out)) return out / "manifest.json";
  fs::path m = out;
  m += ".manifest.json";
  return m;
}

void write_manifest(const fs::path& out, const std::string& command, const std::vector<fs::path>& inputs,
                    const json& config, std::uint64_t seed, OutputGuard& guard) {
  json m;
  m["command"] = command;
  m["version"] = io::kToolVersion;
  m["seed"] = seed;
  m["config"] = config;
  m["inputs"] = hash_inputs(inputs);
  const auto path = manifest_path(out);
  guard.track(path);
  io::write_atomically(path, [&](std::ostream& os) { os << m.dump(2) << '\n'; });
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  fs::path out = p.parent_path() / p.stem();
  out += suffix;
  return out;
}

void log_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) spdlog::warn("{}", w);
}

std::vector<MeasurementSeries> load_corpus(const fs::path& path) {
  require_exists(path);
  auto corpus = io::read_corpus(path);
  if (corpus.empty()) throw DataError("empty corpus");
  for (const auto& s : corpus) {
    const auto report = validate_series(s);
    if (!report.valid()) throw DataError(s.id.to_string() + ": " + report.summary());
  }
  return corpus;
}

std::map<BenchmarkId, int> warmups_from(const std::vector<io::ResultRow>& rows) {
  std::map<BenchmarkId, int> out;
  for (const auto& r : rows) out[r.id] = r.warmup_iterations;
  return out;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  SyntheticSpec spec;
  std::string shapes = "decay,slowdown,oscillating,step";
  fs::path out, truth, sop;
  std::map<std::string, CLI::Option*> opts;
};

void setup_synth(CLI::App& app, SynthArgs& a) {
  auto* sub = app.add_subcommand("synth", "Generate a synthetic corpus with known steady-state starts");
  sub->add_option("--out", a.out, "Corpus output (JSONL)")->required();
  sub->add_option("--truth", a.truth, "Ground-truth annotations (default: <out>.truth.jsonl)");
  sub->add_option("--sop", a.sop, "Also write a developer-settings table (CSV)");
  a.opts["count"] = sub->add_option("--count", a.spec.count, "Number of series");
  a.opts["n"] = sub->add_option("--n", a.spec.n, "Iterations per series");
  a.opts["st_min"] = sub->add_option("--st-min", a.spec.st_min, "Smallest true steady-state iteration");
  a.opts["st_max"] = sub->add_option("--st-max", a.spec.st_max, "Largest true steady-state iteration");
  a.opts["noise"] = sub->add_option("--noise", a.spec.noise, "Noise sd as a fraction of the level gap");
  a.opts["forks"] = sub->add_option("--forks", a.spec.forks, "Series per benchmark");
  a.opts["fork_effect"] = sub->add_option("--fork-effect", a.spec.fork_effect, "Per-fork steady offset sd");
  a.opts["spike_probability"] =
      sub->add_option("--spike-probability", a.spec.spike_probability, "Per-iteration spike probability");
  a.opts["shapes"] = sub->add_option("--shapes", a.shapes, "Comma-separated warm-up shapes");
  a.opts["iteration_duration"] =
      sub->add_option("--iteration-duration", a.spec.iteration_duration, "Seconds per iteration");
}

int run_synth(const Globals& g, SynthArgs& a) {
  const auto& c = g.section("synthetic");
  from_config(c, "count", a.opts["count"], a.spec.count);
  from_config(c, "n", a.opts["n"], a.spec.n);
  from_config(c, "st_min", a.opts["st_min"], a.spec.st_min);
  from_config(c, "st_max", a.opts["st_max"], a.spec.st_max);
  from_config(c, "noise", a.opts["noise"], a.spec.noise);
  from_config(c, "forks", a.opts["forks"], a.spec.forks);
  from_config(c, "fork_effect", a.opts["fork_effect"], a.spec.fork_effect);
  from_config(c, "spike_probability", a.opts["spike_probability"], a.spec.spike_probability);
  from_config(c, "shapes", a.opts["shapes"], a.shapes);
  from_config(c, "iteration_duration", a.opts["iteration_duration"], a.spec.iteration_duration);
  from_config(c, "steady_level", nullptr, a.spec.steady_level);
  from_config(c, "gap_min", nullptr, a.spec.gap_min);
  from_config(c, "gap_max", nullptr, a.spec.gap_max);
  from_config(c, "warmup_noise_factor", nullptr, a.spec.warmup_noise_factor);
  from_config(c, "spike_height", nullptr, a.spec.spike_height);
  from_config(c, "benchmarks_per_project", nullptr, a.spec.benchmarks_per_project);

  a.spec.shapes.clear();
  for (const auto& s : io::split_csv(a.shapes)) a.spec.shapes.push_back(warmup_shape_from_string(s));
  if (a.truth.empty()) a.truth = sibling(a.out, ".truth.jsonl");

  const auto corpus = generate_synthetic_corpus(a.spec, g.seed);
  json config = {{"count", a.spec.count}, {"n", a.spec.n},         {"st_min", a.spec.st_min},
                 {"st_max", a.spec.st_max}, {"noise", a.spec.noise}, {"forks", a.spec.forks},
                 {"fork_effect", a.spec.fork_effect}, {"spike_probability", a.spec.spike_probability},
                 {"shapes", a.shapes}};

  OutputGuard guard;
  guard.track(a.out);
  guard.track(a.truth);
  io::write_corpus(a.out, corpus.series, {"warmstop.corpus", g.seed, {{"synthetic", config}}});
  io::write_annotations(a.truth, corpus.truth, {"warmstop.annotations", g.seed, {{"source", "synthetic"}}});
  if (!a.sop.empty()) {
    guard.track(a.sop);
    std::map<std::string, std::string> projects;
    for (const auto& s : corpus.series) projects[s.id.benchmark] = s.id.project;
    io::write_sop_config(a.sop, corpus.sop, projects, {"warmstop.sop", g.seed, {}});
  }
  write_manifest(a.out, "synth", {}, config, g.seed, guard);
  guard.commit();
  spdlog::info("wrote {} series to {}", corpus.series.size(), a.out.string());
  return kOk;
}

// ---- annotate ---------------------------------------------------------------

struct AnnotateArgs {
  fs::path input, out;
  SteadyStateConfig cfg;
  double penalty = 0.0;
  std::map<std::string, CLI::Option*> opts;
};

void setup_annotate(CLI::App& app, AnnotateArgs& a) {
  auto* sub = app.add_subcommand("annotate", "Annotate each series with its steady-state start");
  sub->add_option("--input,--corpus", a.input, "Corpus (JSONL)")->required();
  sub->add_option("--out,--output", a.out, "Annotations output (JSONL)")->required();
  a.opts["penalty"] = sub->add_option("--penalty", a.penalty, "PELT penalty (default 15 ln n)");
  a.opts["rel_tol"] = sub->add_option("--rel-tol", a.cfg.equivalence_rel_tol, "Relative equivalence tolerance");
  a.opts["abs_tol"] = sub->add_option("--abs-tol", a.cfg.equivalence_abs_tol, "Absolute equivalence tolerance (s)");
  a.opts["min_seg"] = sub->add_option("--min-seg", a.cfg.min_segment_length, "Minimum segment length");
  a.opts["tail_exclusion"] =
      sub->add_option("--tail-exclusion", a.cfg.tail_exclusion, "Segments starting in the last k iterations");
}

SteadyStateConfig resolve_annotate(const Globals& g, AnnotateArgs& a) {
  const auto& c = g.section("steady_state");
  from_config(c, "rel_tol", a.opts["rel_tol"], a.cfg.equivalence_rel_tol);
  from_config(c, "abs_tol", a.opts["abs_tol"], a.cfg.equivalence_abs_tol);
  from_config(c, "min_segment_length", a.opts["min_seg"], a.cfg.min_segment_length);
  from_config(c, "tail_exclusion", a.opts["tail_exclusion"], a.cfg.tail_exclusion);
  if (a.opts["penalty"]->count() > 0) {
    a.cfg.penalty = a.penalty;
  } else if (c.contains("penalty")) {
    a.cfg.penalty = c.at("penalty").get<double>();
  }
  a.cfg.validate();
  return a.cfg;
}

json to_json(const SteadyStateConfig& c) {
  return {{"penalty", c.penalty ? json(*c.penalty) : json("15*ln(n)")},
          {"min_segment_length", c.min_segment_length},
          {"rel_tol", c.equivalence_rel_tol},
          {"abs_tol", c.equivalence_abs_tol},
          {"tail_exclusion", c.tail_exclusion}};
}

AnnotationMap annotate_all(const std::vector<MeasurementSeries>& corpus, const SteadyStateConfig& cfg) {
  auto batch = annotate_corpus(corpus, cfg);
  for (const auto& [id, reason] : batch.errors) spdlog::warn("{}: not annotated ({})", id.to_string(), reason);
  std::size_t reached = 0;
  for (const auto& [id, a] : batch.annotations) reached += a.reached();
  spdlog::info("{} of {} series reach a steady state", reached, batch.annotations.size());
  return batch.annotations;
}

int run_annotate(const Globals& g, AnnotateArgs& a) {
  const auto cfg = resolve_annotate(g, a);
  const auto corpus = load_corpus(a.input);
  const auto annotations = annotate_all(corpus, cfg);
  OutputGuard guard;
  guard.track(a.out);
  io::write_annotations(a.out, annotations, {"warmstop.annotations", g.seed, {{"steady_state", to_json(cfg)}}});
  write_manifest(a.out, "annotate", {a.input}, to_json(cfg), g.seed, guard);
  guard.commit();
  return kOk;
}

// ---- build-dataset ------------------------------------------------------------

struct DatasetArgs {
  fs::path corpus, annotations, out, fold_map;
  SamplingConfig cfg;
  std::map<std::string, CLI::Option*> opts;
};

void setup_dataset(CLI::App& app, DatasetArgs& a) {
  auto* sub = app.add_subcommand("build-dataset", "Sample labelled segments and assign benchmark folds");
  sub->add_option("--corpus", a.corpus, "Corpus (JSONL)")->required();
  sub->add_option("--annotations", a.annotations, "Annotations (JSONL)")->required();
  sub->add_option("--out", a.out, "Dataset output (JSONL)")->required();
  sub->add_option("--fold-map", a.fold_map, "Fold map output (default: <out>.folds.json)");
  a.opts["window"] = sub->add_option("--window", a.cfg.window, "Segment length W");
  a.opts["per_class"] = sub->add_option("--per-class", a.cfg.per_class_per_series, "Segments per class per series");
  a.opts["folds"] = sub->add_option("--folds", a.cfg.folds, "Number of benchmark folds");
}

SamplingConfig resolve_dataset(const Globals& g, DatasetArgs& a) {
  const auto& c = g.section("sampling");
  from_config(c, "window", a.opts["window"], a.cfg.window);
  from_config(c, "per_class_per_series", a.opts["per_class"], a.cfg.per_class_per_series);
  from_config(c, "folds", a.opts["folds"], a.cfg.folds);
  a.cfg.seed = g.seed;
  a.cfg.validate();
  return a.cfg;
}

json to_json(const SamplingConfig& c) {
  return {{"window", c.window}, {"per_class_per_series", c.per_class_per_series}, {"folds", c.folds}};
}

SegmentDataset make_dataset(const std::vector<MeasurementSeries>& corpus, const AnnotationMap& annotations,
                            const SamplingConfig& cfg) {
  auto build = build_dataset(corpus, annotations, cfg);
  log_warnings(build.warnings);
  spdlog::info("{} segments from {} series ({} skipped)", build.dataset.items.size(), build.series_used,
               build.series_skipped);
  auto dataset = assign_folds(std::move(build.dataset), cfg);
  if (const auto v = count_label_violations(dataset, annotations); v > 0) {
    throw std::logic_error(std::to_string(v) + " segment labels disagree with the annotations");
  }
  return dataset;
}

int run_dataset(const Globals& g, DatasetArgs& a) {
  const auto cfg = resolve_dataset(g, a);
  const auto corpus = load_corpus(a.corpus);
  require_exists(a.annotations);
  const auto annotations = io::read_annotations(a.annotations);
  const auto dataset = make_dataset(corpus, annotations, cfg);
  if (a.fold_map.empty()) a.fold_map = sibling(a.out, ".folds.json");

  OutputGuard guard;
  guard.track(a.out);
  guard.track(a.fold_map);
  io::write_dataset(a.out, dataset, {"warmstop.dataset", g.seed, {{"sampling", to_json(cfg)}}});
  io::write_fold_map(a.fold_map, dataset.fold_assignment, {"warmstop.folds", g.seed, {{"folds", cfg.folds}}});
  write_manifest(a.out, "build-dataset", {a.corpus, a.annotations}, to_json(cfg), g.seed, guard);
  guard.commit();
  return kOk;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  fs::path dataset, out;
  int kernels = 500;
  bool cv = false;
  std::string name = "ROCKET";
  std::map<std::string, CLI::Option*> opts;
};

void setup_train(CLI::App& app, TrainArgs& a) {
  auto* sub = app.add_subcommand("train", "Train a ROCKET classifier (or one per fold with --cv)");
  sub->add_option("--dataset", a.dataset, "Segment dataset (JSONL)")->required();
  sub->add_option("--out", a.out, "Model file, or a directory with --cv")->required();
  a.opts["kernels"] = sub->add_option("--kernels", a.kernels, "Number of random kernels");
  sub->add_flag("--cv", a.cv, "Cross-validate over the dataset folds");
  sub->add_option("--name", a.name, "Model name used in reports");
}

int dataset_window(const SegmentDataset& ds) {
  if (ds.items.empty()) throw DataError("empty dataset");
  const auto w = ds.items.front().segment.values.size();
  for (const auto& item : ds.items) {
    if (item.segment.values.size() != w) throw DataError("dataset segments differ in length");
  }
  return static_cast<int>(w);
}

int fold_count(const SegmentDataset& ds) {
  int k = 0;
  for (const auto& [b, f] : ds.fold_assignment) k = std::max(k, f + 1);
  if (k < 2) throw DataError("dataset has no fold assignment");
  return k;
}

fs::path fold_model_path(const fs::path& dir, int fold) { return dir / ("fold-" + std::to_string(fold) + ".bin"); }

int run_train(const Globals& g, TrainArgs& a) {
  from_config(g.section("rocket"), "num_kernels", a.opts["kernels"], a.kernels);
  RocketConfig cfg;
  cfg.num_kernels = a.kernels;
  cfg.seed = g.seed;
  if (cfg.num_kernels < 1) throw ConfigError("--kernels must be >= 1");
  require_exists(a.dataset);
  const auto dataset = io::read_dataset(a.dataset);
  const int window = dataset_window(dataset);
  const json config = {{"num_kernels", cfg.num_kernels}, {"cv", a.cv}};

  OutputGuard guard;
  guard.track(a.out);
  if (a.cv) {
    const int folds = fold_count(dataset);
    auto cv = cross_validate(dataset, folds, cfg);
    fs::create_directories(a.out);
    for (int f = 0; f < folds; ++f) save_model(cv.models[f], fold_model_path(a.out, f));
    write_cv_predictions(a.out / "cv_predictions.csv", dataset, cv.predictions, g.seed);
    write_classification_table(a.out / "classification.csv", {{a.name, average_fold_metrics(cv.predictions, folds)}});
  } else {
    std::vector<std::span<const double>> segments;
    std::vector<Label> labels;
    for (const auto& item : dataset.items) {
      segments.emplace_back(item.segment.values);
      labels.push_back(item.label);
    }
    save_model(fit_rocket(segments, labels, window, cfg), a.out);
  }
  write_manifest(a.out, "train", {a.dataset}, config, g.seed, guard);
  guard.commit();
  return kOk;
}

// ---- predict ----------------------------------------------------------------

struct PredictArgs {
  fs::path model, segment;
  std::string values;
};

void setup_predict(CLI::App& app, PredictArgs& a) {
  auto* sub = app.add_subcommand("predict", "Classify one segment with a trained model");
  sub->add_option("--model", a.model, "Model file")->required();
  auto* seg = sub->add_option("--segment", a.segment, "File with one measurement per line");
  auto* vals = sub->add_option("--values", a.values, "Comma-separated measurements");
  seg->excludes(vals);
}

int run_predict(const Globals&, PredictArgs& a) {
  require_exists(a.model);
  const auto model = load_model(a.model);
  std::vector<double> values;
  std::string text = a.values;
  if (!a.segment.empty()) {
    require_exists(a.segment);
    std::ifstream in(a.segment);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    std::replace(text.begin(), text.end(), '\n', ',');
  }
  for (const auto& f : io::split_csv(text)) {
    if (f.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      values.push_back(std::stod(f));
    } catch (const std::exception&) {
      throw DataError("segment value '" + f + "' is not a number");
    }
  }
  if (static_cast<int>(values.size()) != model.window) {
    throw DataError("window mismatch: model expects " + std::to_string(model.window) + " values, got " +
                    std::to_string(values.size()));
  }
  const double score = decision_score(model, values);
  std::cout << to_string(score > 0.0 ? Label::Stable : Label::Unstable) << ' ' << io::format_double(score) << '\n';
  return kOk;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string method = "model";
  fs::path corpus, models, model, fold_map, sop, out;
  StopConfig stop;
  HeuristicConfig heuristic;
  std::optional<double> threshold;
  std::map<std::string, CLI::Option*> opts;
};

void setup_simulate(CLI::App& app, SimulateArgs& a) {
  auto* sub = app.add_subcommand("simulate", "Replay each series through a stopping method");
  sub->add_option("--method", a.method, "model, sop, cv, rciw or kld")
      ->check(CLI::IsMember({"model", "sop", "cv", "rciw", "kld"}));
  sub->add_option("--corpus", a.corpus, "Corpus (JSONL)")->required();
  sub->add_option("--models", a.models, "Directory of per-fold models");
  sub->add_option("--model", a.model, "Single model applied to every series");
  sub->add_option("--fold-map", a.fold_map, "Fold map (JSON) for --models");
  sub->add_option("--sop", a.sop, "Developer settings table (CSV) for --method sop");
  sub->add_option("--out", a.out, "Results output (CSV)")->required();
  a.opts["window"] = sub->add_option("--window", a.stop.window, "Window length W");
  a.opts["cap"] = sub->add_option("--cap", a.stop.max_warmup_iterations, "Maximum warm-up iterations");
  a.opts["threshold"] = sub->add_option("--threshold", a.threshold, "Heuristic stability threshold");
  a.opts["stability_run"] =
      sub->add_option("--stability-run", a.heuristic.stability_run, "Consecutive stable checks required");
  a.opts["bootstrap_iters"] =
      sub->add_option("--bootstrap-iters", a.heuristic.bootstrap_iters, "RCIW bootstrap resamples per check");
}

std::vector<io::ResultRow> simulate_model(const std::vector<MeasurementSeries>& corpus,
                                          const std::map<std::string, int>& fold_map,
                                          const std::vector<RocketModel>& models, const StopConfig& stop) {
  std::vector<ClassifierHandle> handles;
  for (std::size_t f = 0; f < models.size(); ++f) handles.push_back(make_classifier(models[f], "fold-" + std::to_string(f)));
  std::vector<io::ResultRow> rows;
  for (const auto& r : run_corpus(corpus, fold_map, handles, stop)) {
    rows.push_back({r.id, r.result.warmup_iterations, r.result.halt_reason, r.result.queries});
  }
  return rows;
}

std::vector<io::ResultRow> simulate_baseline(const std::string& method, const std::vector<MeasurementSeries>& corpus,
                                             const SopConfig* sop, const HeuristicConfig& heuristic) {
  std::vector<io::ResultRow> rows;
  for (const auto& s : corpus) {
    try {
      const auto r = method == "sop" ? sop_stop(s, *sop) : heuristic_stop(s, heuristic);
      rows.push_back({s.id, r.warmup_iterations, r.halt_reason, r.queries});
    } catch (const DataError& e) {
      spdlog::warn("{}: skipped by {} ({})", s.id.to_string(), method, e.what());
    }
  }
  return rows;
}

HeuristicConfig resolve_heuristic(const Globals& g, SimulateArgs& a, HeuristicKind kind) {
  auto h = HeuristicConfig::defaults_for(kind);
  const auto& c = g.section(to_string(kind));
  h.stability_run = a.heuristic.stability_run;
  h.bootstrap_iters = a.heuristic.bootstrap_iters;
  from_config(c, "stability_run", a.opts["stability_run"], h.stability_run);
  from_config(c, "bootstrap_iters", a.opts["bootstrap_iters"], h.bootstrap_iters);
  from_config(c, "threshold", nullptr, h.threshold);
  if (a.threshold) h.threshold = *a.threshold;
  h.window = a.stop.window;
  h.cap = a.stop.max_warmup_iterations;
  h.seed = g.seed;
  h.validate();
  return h;
}

int run_simulate(const Globals& g, SimulateArgs& a) {
  const auto& c = g.section("stopper");
  from_config(c, "window", a.opts["window"], a.stop.window);
  from_config(c, "max_warmup_iterations", a.opts["cap"], a.stop.max_warmup_iterations);
  a.stop.validate();
  const auto corpus = load_corpus(a.corpus);
  std::vector<fs::path> inputs = {a.corpus};
  json config = {{"method", a.method}, {"window", a.stop.window}, {"cap", a.stop.max_warmup_iterations}};

  std::vector<io::ResultRow> rows;
  if (a.method == "model") {
    std::vector<RocketModel> models;
    std::map<std::string, int> fold_map;
    if (!a.model.empty()) {
      require_exists(a.model);
      models.push_back(load_model(a.model, a.stop.window));
      for (const auto& s : corpus) fold_map[s.id.benchmark] = 0;
      inputs.push_back(a.model);
    } else {
      if (a.models.empty() || a.fold_map.empty()) throw ConfigError("--method model needs --model or --models with --fold-map");
      require_exists(a.models);
      require_exists(a.fold_map);
      fold_map = io::read_fold_map(a.fold_map);
      int folds = 0;
      for (const auto& [b, f] : fold_map) folds = std::max(folds, f + 1);
      for (int f = 0; f < folds; ++f) {
        const auto p = fold_model_path(a.models, f);
        require_exists(p);
        models.push_back(load_model(p, a.stop.window));
      }
      inputs.push_back(a.models);
      inputs.push_back(a.fold_map);
    }
    rows = simulate_model(corpus, fold_map, models, a.stop);
  } else if (a.method == "sop") {
    if (a.sop.empty()) throw ConfigError("--method sop needs --sop");
    require_exists(a.sop);
    const auto sop = io::read_sop_config(a.sop);
    inputs.push_back(a.sop);
    rows = simulate_baseline("sop", corpus, &sop, {});
  } else {
    const auto h = resolve_heuristic(g, a, heuristic_kind_from_string(a.method));
    config["threshold"] = h.threshold;
    config["stability_run"] = h.stability_run;
    config["bootstrap_iters"] = h.bootstrap_iters;
    rows = simulate_baseline(a.method, corpus, nullptr, h);
  }

  OutputGuard guard;
  guard.track(a.out);
  io::write_results(a.out, rows, {"warmstop.results", g.seed, {{"method", a.method}}});
  write_manifest(a.out, "simulate", inputs, config, g.seed, guard);
  guard.commit();
  return kOk;
}

// ---- evaluate -----------------------------------------------------------------

struct EvaluateArgs {
  fs::path predictions, results, corpus, annotations, sop, out;
  std::string method;
  int folds = 0;
  BootstrapSettings boot;
  int measurement = 100;
  std::map<std::string, CLI::Option*> opts;
};

void setup_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* sub = app.add_subcommand("evaluate", "Score classifier predictions or a stopping method's results");
  auto* pred = sub->add_option("--predictions", a.predictions, "Cross-validation predictions (CSV)");
  auto* res = sub->add_option("--results", a.results, "Simulation results (CSV)");
  pred->excludes(res);
  sub->add_option("--corpus", a.corpus, "Corpus (JSONL), with --results");
  sub->add_option("--annotations", a.annotations, "Ground-truth annotations, with --results");
  sub->add_option("--sop", a.sop, "Developer settings table fixing measurement iterations and forks");
  sub->add_option("--method", a.method, "Method name (default: results file stem)");
  sub->add_option("--folds", a.folds, "Number of folds (default: from predictions)");
  sub->add_option("--out", a.out, "Table (CSV) for --predictions, directory for --results")->required();
  a.opts["measurement"] =
      sub->add_option("--measurement", a.measurement, "Measurement iterations when no SOP table is given");
  a.opts["resamples"] = sub->add_option("--resamples", a.boot.resamples, "Bootstrap resamples");
  a.opts["alpha"] = sub->add_option("--alpha", a.boot.alpha, "CI significance level");
}

int run_evaluate(const Globals& g, EvaluateArgs& a) {
  OutputGuard guard;
  guard.track(a.out);
  if (!a.predictions.empty()) {
    require_exists(a.predictions);
    const auto preds = read_cv_predictions(a.predictions);
    if (preds.empty()) throw DataError("no predictions");
    int folds = a.folds;
    if (folds <= 0) {
      for (const auto& p : preds) folds = std::max(folds, p.fold + 1);
    }
    const auto name = a.method.empty() ? std::string("ROCKET") : a.method;
    write_classification_table(a.out, {{name, average_fold_metrics(preds, folds)}});
    write_manifest(a.out, "evaluate", {a.predictions}, {{"folds", folds}}, g.seed, guard);
    guard.commit();
    return kOk;
  }
  if (a.results.empty()) throw ConfigError("evaluate needs --predictions or --results");
  if (a.corpus.empty() || a.annotations.empty()) throw ConfigError("--results needs --corpus and --annotations");

  const auto& c = g.section("evaluation");
  from_config(c, "measurement_iterations", a.opts["measurement"], a.measurement);
  from_config(c, "resamples", a.opts["resamples"], a.boot.resamples);
  from_config(c, "alpha", a.opts["alpha"], a.boot.alpha);
  a.boot.seed = g.seed;

  const auto corpus = load_corpus(a.corpus);
  require_exists(a.annotations);
  require_exists(a.results);
  const auto annotations = io::read_annotations(a.annotations);
  const auto rows = io::read_results(a.results);
  MeasurementPlan plan;
  plan.default_measurement = a.measurement;
  std::vector<fs::path> inputs = {a.results, a.corpus, a.annotations};
  if (!a.sop.empty()) {
    require_exists(a.sop);
    plan.sop = io::read_sop_config(a.sop);
    inputs.push_back(a.sop);
  }
  const auto method = a.method.empty() ? a.results.stem().string() : a.method;
  const auto eval = evaluate_method(method, corpus, annotations, warmups_from(rows), plan, a.boot);
  log_warnings(eval.warnings);
  fs::create_directories(a.out);
  write_method_evaluation(a.out, eval, g.seed);
  write_manifest(a.out, "evaluate", inputs,
                 {{"method", method}, {"resamples", a.boot.resamples}, {"alpha", a.boot.alpha},
                  {"measurement", a.measurement}},
                 g.seed, guard);
  guard.commit();
  return kOk;
}

// ---- compare ------------------------------------------------------------------

struct CompareArgs {
  fs::path framework, out;
  std::vector<fs::path> baselines;
};

void setup_compare(CLI::App& app, CompareArgs& a) {
  auto* sub = app.add_subcommand("compare", "Compare the framework's evaluation against baselines");
  sub->add_option("--framework", a.framework, "Evaluation directory of the framework")->required();
  sub->add_option("--baseline", a.baselines, "Evaluation directory of a baseline (repeatable)")->required();
  sub->add_option("--out", a.out, "Report directory")->required();
}

struct Reports {
  std::vector<WeeComparison> wee;
  std::vector<ImprovementSummary> improvement;
  std::vector<EvaluationSummary> summaries;
};

Reports build_reports(const MethodEvaluation& framework, const std::vector<MethodEvaluation>& baselines) {
  Reports r;
  r.summaries.push_back(summarize(framework));
  for (const auto& b : baselines) {
    r.summaries.push_back(summarize(b));
    r.wee.push_back(compare_wee(framework, b));
    r.improvement.push_back(compare_benchmarks(framework, b));
  }
  return r;
}

void write_reports(const fs::path& dir, const Reports& r) {
  fs::create_directories(dir);
  write_wee_table(dir / "wee.csv", r.wee);
  write_improvement_table(dir / "improvement.csv", r.improvement);
  write_deviation_time_table(dir / "deviation_time.csv", r.summaries);
  write_estimation_table(dir / "estimation.csv", r.summaries);
  for (const auto& s : r.improvement) write_outcomes(dir / ("outcomes_" + s.baseline + ".csv"), s);
}

int run_compare(const Globals& g, CompareArgs& a) {
  require_exists(a.framework);
  const auto framework = read_method_evaluation(a.framework);
  std::vector<MethodEvaluation> baselines;
  std::vector<fs::path> inputs = {a.framework};
  for (const auto& b : a.baselines) {
    require_exists(b);
    baselines.push_back(read_method_evaluation(b));
    inputs.push_back(b);
  }
  OutputGuard guard;
  guard.track(a.out);
  write_reports(a.out, build_reports(framework, baselines));
  write_manifest(a.out, "compare", inputs, json::object(), g.seed, guard);
  guard.commit();
  return kOk;
}

// ---- pipeline -----------------------------------------------------------------

struct PipelineArgs {
  fs::path corpus, annotations, sop, out;
  int kernels = 500;
  int resamples = 10000;
  int measurement = 100;
  std::vector<std::string> baselines = {"sop", "cv", "rciw", "kld"};
  AnnotateArgs annotate;
  SamplingConfig sampling;
  StopConfig stop;
  std::map<std::string, CLI::Option*> opts;
};

void setup_pipeline(CLI::App& app, PipelineArgs& a) {
  auto* sub = app.add_subcommand("pipeline", "Run annotation, training, replay and evaluation end to end");
  sub->add_option("--corpus", a.corpus, "Corpus (JSONL)")->required();
  sub->add_option("--annotations", a.annotations, "Use these annotations instead of annotating the corpus");
  sub->add_option("--sop", a.sop, "Developer settings table (CSV); enables the SOP baseline");
  sub->add_option("--out", a.out, "Output directory")->required();
  a.opts["kernels"] = sub->add_option("--kernels", a.kernels, "Number of random kernels");
  a.opts["resamples"] = sub->add_option("--resamples", a.resamples, "Bootstrap resamples");
  a.opts["measurement"] =
      sub->add_option("--measurement", a.measurement, "Measurement iterations when no SOP table is given");
  a.opts["window"] = sub->add_option("--window", a.sampling.window, "Window length W");
  a.opts["per_class"] =
      sub->add_option("--per-class", a.sampling.per_class_per_series, "Segments per class per series");
  a.opts["folds"] = sub->add_option("--folds", a.sampling.folds, "Number of benchmark folds");
  a.opts["cap"] = sub->add_option("--cap", a.stop.max_warmup_iterations, "Maximum warm-up iterations");
  sub->add_option("--baselines", a.baselines, "Baselines to compare against")
      ->delimiter(',')
      ->check(CLI::IsMember({"sop", "cv", "rciw", "kld"}));
  a.annotate.opts["penalty"] = sub->add_option("--penalty", a.annotate.penalty, "PELT penalty");
  a.annotate.opts["rel_tol"] = sub->add_option("--rel-tol", a.annotate.cfg.equivalence_rel_tol, "Relative tolerance");
  a.annotate.opts["abs_tol"] = sub->add_option("--abs-tol", a.annotate.cfg.equivalence_abs_tol, "Absolute tolerance");
  a.annotate.opts["min_seg"] = sub->add_option("--min-seg", a.annotate.cfg.min_segment_length, "Minimum segment");
  a.annotate.opts["tail_exclusion"] =
      sub->add_option("--tail-exclusion", a.annotate.cfg.tail_exclusion, "Tail exclusion");
}

int run_pipeline(const Globals& g, PipelineArgs& a) {
  const auto& sc = g.section("sampling");
  from_config(sc, "window", a.opts["window"], a.sampling.window);
  from_config(sc, "per_class_per_series", a.opts["per_class"], a.sampling.per_class_per_series);
  from_config(sc, "folds", a.opts["folds"], a.sampling.folds);
  from_config(g.section("rocket"), "num_kernels", a.opts["kernels"], a.kernels);
  from_config(g.section("evaluation"), "resamples", a.opts["resamples"], a.resamples);
  from_config(g.section("evaluation"), "measurement_iterations", a.opts["measurement"], a.measurement);
  from_config(g.section("stopper"), "max_warmup_iterations", a.opts["cap"], a.stop.max_warmup_iterations);
  a.sampling.seed = g.seed;
  a.sampling.validate();
  a.stop.window = a.sampling.window;
  a.stop.validate();

  const auto corpus = load_corpus(a.corpus);
  std::vector<fs::path> inputs = {a.corpus};
  AnnotationMap annotations;
  json steady_config;
  if (!a.annotations.empty()) {
    require_exists(a.annotations);
    annotations = io::read_annotations(a.annotations);
    inputs.push_back(a.annotations);
    steady_config = "provided";
  } else {
    const auto cfg = resolve_annotate(g, a.annotate);
    annotations = annotate_all(corpus, cfg);
    steady_config = to_json(cfg);
  }
  std::optional<SopConfig> sop;
  if (!a.sop.empty()) {
    require_exists(a.sop);
    sop = io::read_sop_config(a.sop);
    inputs.push_back(a.sop);
  }

  OutputGuard guard;
  guard.track(a.out);
  const auto art = a.out / "artifacts";
  fs::create_directories(art);
  io::write_annotations(art / "annotations.jsonl", annotations, {"warmstop.annotations", g.seed, {}});

  spdlog::info("building dataset");
  const auto dataset = make_dataset(corpus, annotations, a.sampling);
  io::write_fold_map(art / "folds.json", dataset.fold_assignment, {"warmstop.folds", g.seed, {}});

  spdlog::info("cross-validating ROCKET with {} kernels", a.kernels);
  RocketConfig rocket;
  rocket.num_kernels = a.kernels;
  rocket.seed = g.seed;
  const auto cv = cross_validate(dataset, a.sampling.folds, rocket);
  for (int f = 0; f < a.sampling.folds; ++f) save_model(cv.models[f], fold_model_path(art / "models", f));
  write_cv_predictions(art / "cv_predictions.csv", dataset, cv.predictions, g.seed);
  write_classification_table(a.out / "classification.csv",
                             {{"ROCKET", average_fold_metrics(cv.predictions, a.sampling.folds)}});

  MeasurementPlan plan;
  plan.sop = sop;
  plan.default_measurement = a.measurement;
  BootstrapSettings boot;
  boot.resamples = a.resamples;
  boot.seed = g.seed;
  SteadyStateReplicates replicates;

  auto evaluate = [&](const std::string& method, const std::vector<io::ResultRow>& rows) {
    io::write_results(art / (method + "_results.csv"), rows, {"warmstop.results", g.seed, {{"method", method}}});
    auto eval = evaluate_method(method, corpus, annotations, warmups_from(rows), plan, boot, &replicates);
    log_warnings(eval.warnings);
    write_method_evaluation(art / ("eval_" + method), eval, g.seed);
    return eval;
  };

  spdlog::info("replaying the stopping loop");
  const auto framework = evaluate("ROCKET", simulate_model(corpus, dataset.fold_assignment, cv.models, a.stop));

  std::vector<MethodEvaluation> baselines;
  for (const auto& name : a.baselines) {
    if (name == "sop") {
      if (!sop) {
        spdlog::warn("no SOP table given, skipping the SOP baseline");
        continue;
      }
      spdlog::info("replaying SOP");
      baselines.push_back(evaluate("SOP", simulate_baseline("sop", corpus, &*sop, {})));
      continue;
    }
    const auto kind = heuristic_kind_from_string(name);
    auto h = HeuristicConfig::defaults_for(kind);
    from_config(g.section(name.c_str()), "threshold", nullptr, h.threshold);
    from_config(g.section(name.c_str()), "stability_run", nullptr, h.stability_run);
    from_config(g.section(name.c_str()), "bootstrap_iters", nullptr, h.bootstrap_iters);
    h.window = a.stop.window;
    h.cap = a.stop.max_warmup_iterations;
    h.seed = g.seed;
    h.validate();
    std::string label = name;
    std::transform(label.begin(), label.end(), label.begin(), ::toupper);
    spdlog::info("replaying {}", label);
    baselines.push_back(evaluate(label, simulate_baseline(name, corpus, nullptr, h)));
  }
  write_reports(a.out, build_reports(framework, baselines));

  json config = {{"sampling", to_json(a.sampling)},
                 {"steady_state", steady_config},
                 {"num_kernels", a.kernels},
                 {"resamples", a.resamples},
                 {"measurement", a.measurement},
                 {"cap", a.stop.max_warmup_iterations},
                 {"baselines", a.baselines}};
  write_manifest(a.out, "pipeline", inputs, config, g.seed, guard);
  guard.commit();
  return kOk;
}

// ---- entry ------------------------------------------------------------------

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("warmstop");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%^%l%$: %v");
  const char* env = std::getenv("WARMSTOP_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

int fail(const char* kind, const std::string& reason, int code) {
  std::string flat = reason;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  std::cerr << json{{"error", kind}, {"reason", flat}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Detects the end of JIT warm-up in benchmark measurements"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Global seed");
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.set_version_flag("--version", io::kToolVersion);

  SynthArgs synth;
  AnnotateArgs annotate;
  DatasetArgs dataset;
  TrainArgs train;
  PredictArgs predict;
  SimulateArgs simulate;
  EvaluateArgs evaluate;
  CompareArgs compare;
  PipelineArgs pipeline;
  setup_synth(app, synth);
  setup_annotate(app, annotate);
  setup_dataset(app, dataset);
  setup_train(app, train);
  setup_predict(app, predict);
  setup_simulate(app, simulate);
  setup_evaluate(app, evaluate);
  setup_compare(app, compare);
  setup_pipeline(app, pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what(), kUsage);
  }

  try {
    const bool seed_given = app.get_option("--seed")->count() > 0;
    const auto seed = g.seed;
    load_config(g);
    if (seed_given) g.seed = seed;

    const auto* sub = app.get_subcommands().front();
    const auto name = sub->get_name();
    if (name == "synth") return run_synth(g, synth);
    if (name == "annotate") return run_annotate(g, annotate);
    if (name == "build-dataset") return run_dataset(g, dataset);
    if (name == "train") return run_train(g, train);
    if (name == "predict") return run_predict(g, predict);
    if (name == "simulate") return run_simulate(g, simulate);
    if (name == "evaluate") return run_evaluate(g, evaluate);
    if (name == "compare") return run_compare(g, compare);
    if (name == "pipeline") return run_pipeline(g, pipeline);
    return fail("usage", "unknown command " + name, kUsage);
  } catch (const ConfigError& e) {
    return fail("usage", e.what(), kUsage);
  } catch (const DataError& e) {
    return fail("data", e.what(), kData);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kInternal);
  }
}
