#include "warmstop/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "warmstop/io.hpp"
#include "warmstop/rng.hpp"

namespace warmstop {

namespace fs = std::filesystem;

int MeasurementPlan::measurement_for(const std::string& benchmark) const {
  if (sop) {
    auto it = sop->find(benchmark);
    if (it == sop->end()) throw DataError("no SOP configuration for benchmark '" + benchmark + "'");
    return it->second.measurement_iterations;
  }
  return default_measurement;
}

std::optional<int> MeasurementPlan::forks_for(const std::string& benchmark) const {
  if (!sop) return std::nullopt;
  auto it = sop->find(benchmark);
  if (it == sop->end()) throw DataError("no SOP configuration for benchmark '" + benchmark + "'");
  return it->second.forks;
}

const std::vector<double>& SteadyStateReplicates::get(const std::string& benchmark, const ForkGroups& m_star,
                                                      const BootstrapSettings& settings) {
  auto it = cache_.find(benchmark);
  if (it == cache_.end()) {
    it = cache_
             .emplace(benchmark, hierarchical_bootstrap_means(m_star, settings.resamples,
                                                              derive_seed(settings.seed, "mstar:" + benchmark)))
             .first;
  }
  return it->second;
}

MethodEvaluation evaluate_method(const std::string& method, const std::vector<MeasurementSeries>& corpus,
                                 const AnnotationMap& annotations, const std::map<BenchmarkId, int>& warmups,
                                 const MeasurementPlan& plan, const BootstrapSettings& settings,
                                 SteadyStateReplicates* replicates) {
  SteadyStateReplicates local;
  if (!replicates) replicates = &local;

  std::map<std::string, std::vector<const MeasurementSeries*>> by_benchmark;
  for (const auto& s : corpus) by_benchmark[s.id.benchmark].push_back(&s);

  MethodEvaluation eval;
  eval.method = method;
  for (auto& [bench, members] : by_benchmark) {
    std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->id.fork < b->id.fork; });

    ForkGroups m_star;
    std::vector<std::pair<const MeasurementSeries*, int>> evaluated;  // series, warm-up
    double wee_sum = 0.0;
    for (const auto* s : members) {
      auto ann = annotations.find(s->id);
      if (ann == annotations.end() || !ann->second.reached()) continue;
      const int st = *ann->second.st;
      m_star.emplace_back(s->values.begin() + (st - 1), s->values.end());

      auto w = warmups.find(s->id);
      if (w == warmups.end()) {
        eval.warnings.push_back(s->id.to_string() + ": no result for this method");
        continue;
      }
      SeriesEval se{method, s->id, st, w->second, wee(w->second, st, s->iteration_duration),
                    estimation_category(w->second, st)};
      wee_sum += se.wee_s;
      eval.series.push_back(se);
      evaluated.emplace_back(s, w->second);
    }
    if (m_star.empty()) {
      eval.warnings.push_back(bench + ": no fork reaches a steady state, excluded");
      continue;
    }
    if (evaluated.empty()) continue;

    const int measurement = plan.measurement_for(bench);
    const auto fork_cap = plan.forks_for(bench);
    const std::size_t used = fork_cap ? std::min<std::size_t>(*fork_cap, evaluated.size()) : evaluated.size();

    ForkGroups m;
    double time = 0.0;
    for (std::size_t k = 0; k < used; ++k) {
      const auto& [s, w] = evaluated[k];
      const auto begin = std::min<std::size_t>(w, s->values.size());
      const auto end = std::min<std::size_t>(begin + measurement, s->values.size());
      if (end > begin) m.emplace_back(s->values.begin() + begin, s->values.begin() + end);
      time += testing_time(w, measurement, s->iteration_duration, 1);
    }
    if (m.empty()) {
      eval.warnings.push_back(bench + ": no measurements returned, excluded from deviation analysis");
      continue;
    }

    const auto num = hierarchical_bootstrap_means(m, settings.resamples,
                                                  derive_seed(settings.seed, "m:" + method + ":" + bench));
    const auto& den = replicates->get(bench, m_star, settings);

    BenchmarkEval be;
    be.method = method;
    be.project = members.front()->id.project;
    be.benchmark = bench;
    be.wee_s = wee_sum / static_cast<double>(evaluated.size());
    be.ci = ratio_ci_from_replicates(num, den, settings.alpha);
    be.rel_dev_pct = relative_deviation(be.ci);
    be.testing_time_s = time;
    be.forks_used = static_cast<int>(used);
    be.measurement_iterations = measurement;
    eval.benchmarks.push_back(be);
  }
  return eval;
}

EvaluationSummary summarize(const MethodEvaluation& eval) {
  EvaluationSummary s;
  s.method = eval.method;
  s.series = eval.series.size();
  s.benchmarks = eval.benchmarks.size();
  if (!eval.benchmarks.empty()) {
    std::vector<double> dev, time;
    for (const auto& b : eval.benchmarks) {
      dev.push_back(b.rel_dev_pct);
      time.push_back(b.testing_time_s);
    }
    s.rel_dev_pct = quartiles(dev);
    s.testing_time_s = quartiles(time);
  }
  if (!eval.series.empty()) {
    std::size_t over = 0, under = 0, exact = 0;
    for (const auto& se : eval.series) {
      switch (se.category) {
        case EstimationCategory::Overestimate: ++over; break;
        case EstimationCategory::Underestimate: ++under; break;
        case EstimationCategory::ExactMatch: ++exact; break;
      }
    }
    const double n = static_cast<double>(eval.series.size());
    s.pct_overestimate = 100.0 * over / n;
    s.pct_underestimate = 100.0 * under / n;
    s.pct_exact = 100.0 * exact / n;
  }
  return s;
}

WeeComparison compare_wee(const MethodEvaluation& framework, const MethodEvaluation& baseline) {
  std::map<BenchmarkId, double> base;
  for (const auto& s : baseline.series) base[s.id] = s.wee_s;

  std::vector<double> fw, bl, diffs;
  for (const auto& s : framework.series) {
    auto it = base.find(s.id);
    if (it == base.end()) continue;
    fw.push_back(s.wee_s);
    bl.push_back(it->second);
    diffs.push_back(it->second - s.wee_s);
  }
  WeeComparison out;
  out.framework = framework.method;
  out.baseline = baseline.method;
  out.pairs = diffs.size();
  if (diffs.empty()) throw DataError("compare: no paired series between " + framework.method + " and " + baseline.method);
  out.a12 = vargha_delaney_a12(fw, bl);
  if (std::any_of(diffs.begin(), diffs.end(), [](double d) { return d != 0.0; })) {
    out.p_value = wilcoxon_signed_rank(diffs);
    out.r = rank_biserial(diffs);
  }
  return out;
}

ImprovementSummary compare_benchmarks(const MethodEvaluation& framework, const MethodEvaluation& baseline) {
  std::map<std::string, const BenchmarkEval*> base;
  for (const auto& b : baseline.benchmarks) base[b.benchmark] = &b;

  ImprovementSummary out;
  out.framework = framework.method;
  out.baseline = baseline.method;
  std::size_t iq = 0, it = 0, rq = 0, rt = 0;
  for (const auto& f : framework.benchmarks) {
    auto b = base.find(f.benchmark);
    if (b == base.end()) continue;
    auto outcome = compare_outcome({f.ci, f.testing_time_s}, {b->second->ci, b->second->testing_time_s});
    switch (outcome.category) {
      case ComparisonCategory::ImprovedQuality: ++iq; break;
      case ComparisonCategory::ImprovedTime: ++it; break;
      case ComparisonCategory::RegressedQuality: ++rq; break;
      case ComparisonCategory::RegressedTime: ++rt; break;
      case ComparisonCategory::NoChange: break;
    }
    out.outcomes.emplace_back(f.benchmark, outcome);
  }
  out.benchmarks = out.outcomes.size();
  if (out.benchmarks > 0) {
    const double n = static_cast<double>(out.benchmarks);
    out.improved_quality_pct = 100.0 * iq / n;
    out.improved_time_pct = 100.0 * it / n;
    out.regressed_quality_pct = 100.0 * rq / n;
    out.regressed_time_pct = 100.0 * rt / n;
  }
  return out;
}

ClassificationMetrics average_fold_metrics(const std::vector<FoldPrediction>& predictions, int folds) {
  ClassificationMetrics avg;
  double sums[4] = {0, 0, 0, 0};
  int counts[4] = {0, 0, 0, 0};
  auto add = [&](int k, const std::optional<double>& v) {
    if (v) {
      sums[k] += *v;
      ++counts[k];
    }
  };
  for (int f = 0; f < folds; ++f) {
    std::vector<Label> pred, truth;
    for (const auto& p : predictions) {
      if (p.fold != f) continue;
      pred.push_back(p.predicted);
      truth.push_back(p.truth);
      if (p.predicted == Label::Stable) (p.truth == Label::Stable ? avg.tp : avg.fp)++;
      else (p.truth == Label::Stable ? avg.fn : avg.tn)++;
    }
    if (truth.empty()) continue;
    try {
      const auto m = classification_metrics(pred, truth);
      add(0, m.precision);
      add(1, m.recall);
      add(2, m.f1);
      add(3, m.balanced_accuracy);
    } catch (const DataError&) {
      // A fold with a single class has no balanced accuracy; it is skipped.
    }
  }
  auto mean = [&](int k) -> std::optional<double> {
    if (counts[k] == 0) return std::nullopt;
    return sums[k] / counts[k];
  };
  avg.precision = mean(0);
  avg.recall = mean(1);
  avg.f1 = mean(2);
  avg.balanced_accuracy = mean(3);
  if (avg.recall && avg.balanced_accuracy) avg.recall_unstable = 2.0 * *avg.balanced_accuracy - *avg.recall;
  return avg;
}

// ---- persistence --------------------------------------------------------

namespace {

using io::format_double;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string opt_fixed(const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : "NA"; }

std::string p_value_text(const std::optional<double>& p) {
  if (!p) return "NA";
  if (*p < 0.001) return "<0.001";
  return fixed(*p, 3);
}

void write_text(const fs::path& path, const std::string& header_comment, const std::string& body) {
  io::write_atomically(path, [&](std::ostream& out) {
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    out << body;
  });
}

EstimationCategory category_from_string(const std::string& s) {
  if (s == "underestimate") return EstimationCategory::Underestimate;
  if (s == "overestimate") return EstimationCategory::Overestimate;
  if (s == "exact") return EstimationCategory::ExactMatch;
  throw DataError("unknown estimation category '" + s + "'");
}

int to_int(const std::string& s) { return std::stoi(s); }
double to_double(const std::string& s) { return std::stod(s); }

}  // namespace

void write_method_evaluation(const fs::path& dir, const MethodEvaluation& eval, std::uint64_t seed) {
  io::ArtifactHeader header{"warmstop.evaluation", seed, {{"method", eval.method}}};
  const auto comment = header.to_json().dump();

  std::string series = "method,project,benchmark,fork,st,warmup,wee_s,estimation\n";
  for (const auto& s : eval.series) {
    series += s.method + ',' + s.id.project + ',' + s.id.benchmark + ',' + std::to_string(s.id.fork) + ',' +
              std::to_string(s.st) + ',' + std::to_string(s.warmup) + ',' + format_double(s.wee_s) + ',' +
              to_string(s.category) + '\n';
  }
  write_text(dir / "series.csv", comment, series);

  std::string bench =
      "method,project,benchmark,wee_s,ci_lower,ci_upper,rel_dev_pct,testing_time_s,forks,measurement,alpha,"
      "resamples,category\n";
  for (const auto& b : eval.benchmarks) {
    bench += b.method + ',' + b.project + ',' + b.benchmark + ',' + format_double(b.wee_s) + ',' +
             format_double(b.ci.lower) + ',' + format_double(b.ci.upper) + ',' + format_double(b.rel_dev_pct) + ',' +
             format_double(b.testing_time_s) + ',' + std::to_string(b.forks_used) + ',' +
             std::to_string(b.measurement_iterations) + ',' + format_double(b.ci.alpha) + ',' +
             std::to_string(b.ci.resamples) + ',' + (b.ci.includes_one() ? "no_difference" : "deviates") + '\n';
  }
  write_text(dir / "benchmarks.csv", comment, bench);

  write_deviation_time_table(dir / "summary.csv", {summarize(eval)});
}

MethodEvaluation read_method_evaluation(const fs::path& dir) {
  MethodEvaluation eval;
  try {
    for (const auto& row : io::read_csv(dir / "series.csv")) {
      SeriesEval s;
      s.method = row.at("method");
      s.id = {row.at("project"), row.at("benchmark"), to_int(row.at("fork"))};
      s.st = to_int(row.at("st"));
      s.warmup = to_int(row.at("warmup"));
      s.wee_s = to_double(row.at("wee_s"));
      s.category = category_from_string(row.at("estimation"));
      eval.method = s.method;
      eval.series.push_back(s);
    }
    for (const auto& row : io::read_csv(dir / "benchmarks.csv")) {
      BenchmarkEval b;
      b.method = row.at("method");
      b.project = row.at("project");
      b.benchmark = row.at("benchmark");
      b.wee_s = to_double(row.at("wee_s"));
      b.ci.lower = to_double(row.at("ci_lower"));
      b.ci.upper = to_double(row.at("ci_upper"));
      b.ci.center = 0.5 * (b.ci.lower + b.ci.upper);
      b.ci.alpha = to_double(row.at("alpha"));
      b.ci.resamples = to_int(row.at("resamples"));
      b.rel_dev_pct = to_double(row.at("rel_dev_pct"));
      b.testing_time_s = to_double(row.at("testing_time_s"));
      b.forks_used = to_int(row.at("forks"));
      b.measurement_iterations = to_int(row.at("measurement"));
      eval.method = b.method;
      eval.benchmarks.push_back(b);
    }
  } catch (const std::out_of_range&) {
    throw DataError(dir.string() + ": evaluation report is missing a column");
  } catch (const std::invalid_argument&) {
    throw DataError(dir.string() + ": evaluation report has a malformed number");
  }
  return eval;
}

void write_cv_predictions(const fs::path& path, const SegmentDataset& dataset,
                          const std::vector<FoldPrediction>& predictions, std::uint64_t seed) {
  io::ArtifactHeader header{"warmstop.cv-predictions", seed, {}};
  std::string body = "project,benchmark,fork,start,fold,truth,predicted,score\n";
  for (const auto& p : predictions) {
    const auto& seg = dataset.items.at(p.item).segment;
    body += seg.source.project + ',' + seg.source.benchmark + ',' + std::to_string(seg.source.fork) + ',' +
            std::to_string(seg.start) + ',' + std::to_string(p.fold) + ',' + to_string(p.truth) + ',' +
            to_string(p.predicted) + ',' + format_double(p.score) + '\n';
  }
  write_text(path, header.to_json().dump(), body);
}

std::vector<FoldPrediction> read_cv_predictions(const fs::path& path) {
  std::vector<FoldPrediction> out;
  std::size_t index = 0;
  try {
    for (const auto& row : io::read_csv(path)) {
      FoldPrediction p;
      p.item = index++;
      p.fold = to_int(row.at("fold"));
      p.truth = label_from_string(row.at("truth"));
      p.predicted = label_from_string(row.at("predicted"));
      p.score = to_double(row.at("score"));
      out.push_back(p);
    }
  } catch (const std::out_of_range&) {
    throw DataError(path.string() + ": predictions file is missing a column");
  } catch (const std::invalid_argument&) {
    throw DataError(path.string() + ": predictions file has a malformed number");
  }
  return out;
}

void write_classification_table(const fs::path& path, const std::vector<ClassificationRow>& rows) {
  std::string body = "model,precision,recall,f1,balanced_accuracy\n";
  for (const auto& r : rows) {
    body += r.model + ',' + opt_fixed(r.metrics.precision, 3) + ',' + opt_fixed(r.metrics.recall, 3) + ',' +
            opt_fixed(r.metrics.f1, 3) + ',' + opt_fixed(r.metrics.balanced_accuracy, 3) + '\n';
  }
  write_text(path, "", body);
}

void write_wee_table(const fs::path& path, const std::vector<WeeComparison>& rows) {
  std::string body = "comparison,pairs,p_value,a12,r\n";
  for (const auto& r : rows) {
    body += r.framework + " vs " + r.baseline + ',' + std::to_string(r.pairs) + ',' + p_value_text(r.p_value) + ',' +
            fixed(r.a12, 3) + ',' + opt_fixed(r.r, 3) + '\n';
  }
  write_text(path, "", body);
}

void write_improvement_table(const fs::path& path, const std::vector<ImprovementSummary>& rows) {
  std::string body =
      "comparison,benchmarks,improved_quality_pct,improved_time_pct,improved_total_pct,regressed_quality_pct,"
      "regressed_time_pct,regressed_total_pct,net_pct\n";
  for (const auto& r : rows) {
    body += r.framework + " vs " + r.baseline + ',' + std::to_string(r.benchmarks) + ',' +
            fixed(r.improved_quality_pct, 1) + ',' + fixed(r.improved_time_pct, 1) + ',' +
            fixed(r.total_improved_pct(), 1) + ',' + fixed(r.regressed_quality_pct, 1) + ',' +
            fixed(r.regressed_time_pct, 1) + ',' + fixed(r.total_regressed_pct(), 1) + ',' +
            (r.net_pct() >= 0 ? "+" : "") + fixed(r.net_pct(), 1) + '\n';
  }
  write_text(path, "", body);
}

void write_deviation_time_table(const fs::path& path, const std::vector<EvaluationSummary>& rows) {
  std::string body =
      "method,benchmarks,rel_dev_median_pct,rel_dev_q1_pct,rel_dev_q3_pct,testing_time_median_s,testing_time_q1_s,"
      "testing_time_q3_s\n";
  for (const auto& r : rows) {
    body += r.method + ',' + std::to_string(r.benchmarks) + ',' + fixed(r.rel_dev_pct.median, 1) + ',' +
            fixed(r.rel_dev_pct.q1, 1) + ',' + fixed(r.rel_dev_pct.q3, 1) + ',' + fixed(r.testing_time_s.median, 0) +
            ',' + fixed(r.testing_time_s.q1, 0) + ',' + fixed(r.testing_time_s.q3, 0) + '\n';
  }
  write_text(path, "", body);
}

void write_estimation_table(const fs::path& path, const std::vector<EvaluationSummary>& rows) {
  std::string body = "method,series,overestimate_pct,underestimate_pct,exact_pct\n";
  for (const auto& r : rows) {
    body += r.method + ',' + std::to_string(r.series) + ',' + fixed(r.pct_overestimate, 1) + ',' +
            fixed(r.pct_underestimate, 1) + ',' + fixed(r.pct_exact, 1) + '\n';
  }
  write_text(path, "", body);
}

void write_outcomes(const fs::path& path, const ImprovementSummary& summary) {
  std::string body =
      "framework,baseline,benchmark,framework_ci_lower,framework_ci_upper,framework_time_s,baseline_ci_lower,"
      "baseline_ci_upper,baseline_time_s,category\n";
  for (const auto& [bench, o] : summary.outcomes) {
    body += summary.framework + ',' + summary.baseline + ',' + bench + ',' + format_double(o.framework.ci.lower) +
            ',' + format_double(o.framework.ci.upper) + ',' + format_double(o.framework.testing_time) + ',' +
            format_double(o.baseline.ci.lower) + ',' + format_double(o.baseline.ci.upper) + ',' +
            format_double(o.baseline.testing_time) + ',' + to_string(o.category) + '\n';
  }
  write_text(path, "", body);
}

}  // namespace warmstop
