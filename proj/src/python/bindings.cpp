#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "warmstop/baselines.hpp"
#include "warmstop/core_data.hpp"
#include "warmstop/evaluation.hpp"
#include "warmstop/rocket.hpp"
#include "warmstop/segmentation.hpp"
#include "warmstop/steady_state.hpp"
#include "warmstop/stopper.hpp"
#include "warmstop/synthetic.hpp"

namespace py = pybind11;
using namespace warmstop;

namespace {

SteadyStateConfig steady_config(std::optional<double> penalty, int min_segment_length, double rel_tol,
                                double abs_tol, int tail_exclusion) {
  SteadyStateConfig c;
  c.penalty = penalty;
  c.min_segment_length = min_segment_length;
  c.equivalence_rel_tol = rel_tol;
  c.equivalence_abs_tol = abs_tol;
  c.tail_exclusion = tail_exclusion;
  c.validate();
  return c;
}

MeasurementSeries as_series(std::vector<double> values, double iteration_duration = 1.0) {
  MeasurementSeries s;
  s.id = {"py", "py", 0};
  s.values = std::move(values);
  s.iteration_duration = iteration_duration;
  return s;
}

py::dict stop_dict(const StopResult& r) {
  py::dict d;
  d["warmup_iterations"] = r.warmup_iterations;
  d["measurements"] = r.measurements;
  d["halt_reason"] = to_string(r.halt_reason);
  d["queries"] = r.queries;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Warm-up detection: steady-state annotation, ROCKET stopping and evaluation statistics";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("standardize", [](const std::vector<double>& v) { return standardize_segment(v).values; }, py::arg("values"));

  m.def(
      "changepoints",
      [](const std::vector<double>& values, std::optional<double> penalty, int min_segment_length) {
        return pelt_changepoints(values, steady_config(penalty, min_segment_length, 0.05, 0.0, 100)).changepoints;
      },
      py::arg("values"), py::arg("penalty") = py::none(), py::arg("min_segment_length") = 5);

  m.def(
      "annotate",
      [](std::vector<double> values, std::optional<double> penalty, int min_segment_length, double rel_tol,
         double abs_tol, int tail_exclusion) -> std::optional<int> {
        const auto cfg = steady_config(penalty, min_segment_length, rel_tol, abs_tol, tail_exclusion);
        return annotate_series(as_series(std::move(values)), cfg).st;
      },
      py::arg("values"), py::arg("penalty") = py::none(), py::arg("min_segment_length") = 5,
      py::arg("rel_tol") = 0.05, py::arg("abs_tol") = 0.0, py::arg("tail_exclusion") = 100,
      "Steady-state start (1-based), or None when the series never settles.");

  m.def(
      "sampling_steps",
      [](int n, int st, int per_class) {
        const auto s = sampling_steps(n, st, per_class);
        return py::make_tuple(s.unstable, s.stable);
      },
      py::arg("n"), py::arg("st"), py::arg("per_class") = 50);

  m.def(
      "synthetic_corpus",
      [](int count, int n, int st_min, int st_max, double noise, double spike_probability, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.count = count;
        spec.n = n;
        spec.st_min = st_min;
        spec.st_max = st_max;
        spec.noise = noise;
        spec.spike_probability = spike_probability;
        const auto corpus = generate_synthetic_corpus(spec, seed);
        py::list out;
        for (const auto& s : corpus.series) {
          py::dict d;
          d["benchmark"] = s.id.benchmark;
          d["fork"] = s.id.fork;
          d["values"] = s.values;
          d["st"] = *corpus.truth.at(s.id).st;
          out.append(d);
        }
        return out;
      },
      py::arg("count") = 10, py::arg("n") = 800, py::arg("st_min") = 301, py::arg("st_max") = 301,
      py::arg("noise") = 0.02, py::arg("spike_probability") = 0.0, py::arg("seed") = 0);

  py::class_<RocketModel>(m, "RocketModel")
      .def_readonly("window", &RocketModel::window)
      .def_readonly("alpha", &RocketModel::alpha)
      .def_property_readonly("num_kernels", [](const RocketModel& r) { return r.kernels.size(); })
      .def("decision_score", [](const RocketModel& r, const std::vector<double>& s) { return decision_score(r, s); })
      .def("predict", [](const RocketModel& r, const std::vector<double>& s) { return to_string(predict(r, s)); })
      .def("save", [](const RocketModel& r, const std::filesystem::path& p) { save_model(r, p); })
      .def_static("load", [](const std::filesystem::path& p) { return load_model(p); })
      .def(py::self == py::self);

  m.def(
      "train_rocket",
      [](const std::vector<std::vector<double>>& segments, const std::vector<std::string>& labels, int num_kernels,
         std::uint64_t seed) {
        if (segments.empty()) throw DataError("empty dataset");
        if (segments.size() != labels.size()) throw ConfigError("segments and labels differ in length");
        std::vector<std::span<const double>> views(segments.begin(), segments.end());
        std::vector<Label> parsed;
        for (const auto& l : labels) parsed.push_back(label_from_string(l));
        RocketConfig cfg;
        cfg.num_kernels = num_kernels;
        cfg.seed = seed;
        return fit_rocket(views, parsed, static_cast<int>(segments.front().size()), cfg);
      },
      py::arg("segments"), py::arg("labels"), py::arg("num_kernels") = 500, py::arg("seed") = 0);

  m.def(
      "run_stopper",
      [](std::vector<double> values, const RocketModel& model, int cap) {
        StopConfig cfg{model.window, cap};
        return stop_dict(run_stopper(as_series(std::move(values)), make_classifier(model, "python"), cfg));
      },
      py::arg("values"), py::arg("model"), py::arg("cap") = 500);

  m.def(
      "heuristic_stop",
      [](std::vector<double> values, const std::string& kind, std::optional<double> threshold, int window, int cap,
         std::uint64_t seed) {
        auto cfg = HeuristicConfig::defaults_for(heuristic_kind_from_string(kind));
        if (threshold) cfg.threshold = *threshold;
        cfg.window = window;
        cfg.cap = cap;
        cfg.seed = seed;
        cfg.validate();
        return stop_dict(heuristic_stop(as_series(std::move(values)), cfg));
      },
      py::arg("values"), py::arg("kind"), py::arg("threshold") = py::none(), py::arg("window") = 100,
      py::arg("cap") = 500, py::arg("seed") = 0);

  m.def("wee", &wee, py::arg("estimated_warmup"), py::arg("st"), py::arg("iteration_duration"));

  m.def(
      "ratio_ci",
      [](const ForkGroups& m_forks, const ForkGroups& m_star, double alpha, int resamples, std::uint64_t seed) {
        const auto ci = ratio_ci_bootstrap(m_forks, m_star, alpha, resamples, seed);
        return py::make_tuple(ci.lower, ci.upper);
      },
      py::arg("m"), py::arg("m_star"), py::arg("alpha") = 0.05, py::arg("resamples") = 10000, py::arg("seed") = 0);

  m.def("wilcoxon", [](const std::vector<double>& d) { return wilcoxon_signed_rank(d); }, py::arg("paired_diffs"));
  m.def(
      "a12", [](const std::vector<double>& a, const std::vector<double>& b) { return vargha_delaney_a12(a, b); },
      py::arg("a"), py::arg("b"));
  m.def("rank_biserial", [](const std::vector<double>& d) { return rank_biserial(d); }, py::arg("paired_diffs"));
}
