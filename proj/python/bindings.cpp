#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fadingfl/commands.hpp"
#include "fadingfl/error.hpp"

namespace py = pybind11;
using namespace fadingfl;

namespace {

ExpectationMethod method_from(const std::string& name, std::size_t rounds, std::uint64_t seed) {
  if (name == "quadrature") return QuadratureMethod{};
  if (name == "monte_carlo") return MonteCarloMethod{rounds, seed};
  throw py::value_error("method must be 'quadrature' or 'monte_carlo'");
}

py::dict trace_dict(const ExperimentConfig& cell, const ExperimentTrace& t) {
  py::list rounds;
  for (const auto& r : t.rounds) {
    py::dict d;
    d["round"] = r.round;
    d["start_s"] = r.start_s;
    d["duration_s"] = r.duration_s;
    d["selected"] = r.selected;
    d["successes"] = r.successes;
    d["capped"] = r.capped;
    d["accuracy"] = r.accuracy;
    rounds.append(d);
  }
  py::dict out;
  out["label"] = cell.label();
  out["seed"] = t.seed;
  out["payload_bits"] = t.payload_bits;
  out["initial_accuracy"] = t.initial_accuracy;
  out["final_accuracy"] = t.final_accuracy();
  out["rounds"] = rounds;
  if (t.fixed_rate) {
    out["rate_bps"] = t.fixed_rate->rate_bps;
    out["alpha"] = t.fixed_rate->alpha;
  }
  out["time_to_90_s"] = time_to_accuracy(t, 0.90);
  out["time_to_95_s"] = time_to_accuracy(t, 0.95);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fading-channel federated learning simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericFailure>(m, "NumericFailure", PyExc_ArithmeticError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<FadingModel>(m, "FadingModel")
      .def_static("rayleigh", &FadingModel::rayleigh, py::arg("sigma2") = 1.0)
      .def_static("rician", &FadingModel::rician, py::arg("k_factor"), py::arg("sigma2") = 1.0)
      .def_static("rician_db", &FadingModel::rician_db, py::arg("k_db"), py::arg("sigma2") = 1.0)
      .def_static("nakagami", &FadingModel::nakagami, py::arg("m"), py::arg("sigma2") = 1.0)
      .def("cdf", &FadingModel::cdf)
      .def("pdf", &FadingModel::pdf)
      .def("quantile", &FadingModel::quantile)
      .def("sample",
           [](const FadingModel& self, std::size_t n, std::uint64_t seed) {
             RandomStream rng(seed);
             std::vector<double> out(n);
             for (double& h : out) h = self.sample(rng);
             return out;
           },
           py::arg("n"), py::arg("seed") = 1)
      .def_property_readonly("kind", &FadingModel::kind)
      .def("__repr__", &FadingModel::describe)
      .def(py::self == py::self);

  m.def("min_gain_cdf", [](const FadingModel& model, std::size_t c, double h) {
    return min_gain_cdf(MinGainStats(c, model), h);
  }, py::arg("model"), py::arg("clients"), py::arg("h"));
  m.def("min_gain_pdf", [](const FadingModel& model, std::size_t c, double h) {
    return min_gain_pdf(MinGainStats(c, model), h);
  }, py::arg("model"), py::arg("clients"), py::arg("h"));

  m.def("expected_min_rate",
        [](const FadingModel& model, std::size_t c, double quality_factor, double bandwidth_hz,
           const std::string& method, std::size_t rounds, std::uint64_t seed) {
          const LinkConfig link{bandwidth_hz, quality_factor, 1};
          return expected_min_rate(link, MinGainStats(c, model), method_from(method, rounds, seed));
        },
        py::arg("model"), py::arg("clients"), py::arg("quality_factor") = 1.0, py::arg("bandwidth_hz") = 1e6,
        py::arg("method") = "quadrature", py::arg("rounds") = 100000, py::arg("seed") = 1,
        "E[B log2(1 + A h_min)] in bit/s.");

  m.def("outage_probability",
        [](const FadingModel& model, double rate_bps, double quality_factor, double bandwidth_hz) {
          return outage_probability(LinkConfig{bandwidth_hz, quality_factor, 1}, model, rate_bps);
        },
        py::arg("model"), py::arg("rate_bps"), py::arg("quality_factor") = 1.0, py::arg("bandwidth_hz") = 1e6);

  m.def("fixed_rate",
        [](const FadingModel& model, double outage_target, std::size_t c, double quality_factor,
           double bandwidth_hz) {
          const auto sel = frfl_select_rate(LinkConfig{bandwidth_hz, quality_factor, 1}, model,
                                            FrflTargetPolicy{outage_target}, c);
          py::dict d;
          d["rate_bps"] = sel.rate_bps;
          d["outage"] = sel.outage;
          d["expected_min_rate_bps"] = sel.expected_min_rate_bps;
          d["alpha"] = sel.alpha;
          d["premise_holds"] = sel.premise_holds();
          return d;
        },
        py::arg("model"), py::arg("outage_target"), py::arg("clients"), py::arg("quality_factor") = 1.0,
        py::arg("bandwidth_hz") = 1e6);

  m.def("default_config", [] { return serialize_run_config(RunConfig{}); },
        "Default run configuration as canonical JSON.");
  m.def("normalize_config", [](const std::string& text) { return serialize_run_config(parse_run_config(text)); },
        py::arg("config_json"), "Parses and re-serializes a configuration; raises ConfigError if invalid.");
  m.def("grid_labels", [](const std::string& text) {
    std::vector<std::string> labels;
    for (const auto& cell : parse_run_config(text).expand_grid()) labels.push_back(cell.label());
    return labels;
  }, py::arg("config_json"));

  m.def("rates_csv",
        [](const std::string& text) {
          const RunConfig cfg = parse_run_config(text);
          std::vector<RatesRow> rows;
          {
            py::gil_scoped_release release;
            rows = compute_rates(cfg);
          }
          std::ostringstream out;
          write_rates_csv(out, rows);
          return out.str();
        },
        py::arg("config_json") = "{}");

  m.def("run_replicate",
        [](const std::string& text, std::size_t cell_index, std::uint64_t seed) {
          const RunConfig cfg = parse_run_config(text);
          const auto cells = cfg.expand_grid();
          if (cell_index >= cells.size()) throw py::index_error("cell_index out of range");
          std::optional<ExperimentTrace> trace;
          {
            py::gil_scoped_release release;
            const DatasetPair data = load_dataset(cfg);
            trace = run_replicate(cells[cell_index], data.train, data.test, seed);
          }
          return trace_dict(cells[cell_index], *trace);
        },
        py::arg("config_json"), py::arg("cell_index"), py::arg("seed"));

  m.def("train_csv",
        [](const std::string& text, std::size_t jobs) {
          const RunConfig cfg = parse_run_config(text);
          std::ostringstream traces, summary;
          bool ok = false;
          {
            py::gil_scoped_release release;
            const DatasetPair data = load_dataset(cfg);
            const TrainResult result = run_training(cfg, data, jobs);
            write_trace_csv(traces, result);
            write_summary_csv(summary, result);
            ok = result.grid.all_succeeded();
          }
          return py::make_tuple(traces.str(), summary.str(), ok);
        },
        py::arg("config_json"), py::arg("jobs") = 1,
        "Runs the configured grid; returns (traces_csv, summary_csv, all_succeeded).");

  m.def("validate",
        [](std::size_t gof_samples, std::size_t mc_rounds, std::size_t outage_samples, std::uint64_t seed) {
          ValidationOptions opts;
          opts.gof_samples = gof_samples;
          opts.mc_rounds = mc_rounds;
          opts.outage_samples = outage_samples;
          opts.seed = seed;
          std::vector<CheckResult> results;
          {
            py::gil_scoped_release release;
            results = run_validation(opts);
          }
          py::list out;
          for (const auto& r : results) {
            py::dict d;
            d["name"] = r.name;
            d["tolerance"] = r.tolerance;
            d["observed"] = r.observed;
            d["passed"] = r.passed;
            out.append(d);
          }
          return out;
        },
        py::arg("gof_samples") = 100000, py::arg("mc_rounds") = 100000, py::arg("outage_samples") = 1000000,
        py::arg("seed") = 1);
}
