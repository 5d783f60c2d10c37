#include "fadingfl/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "fadingfl/error.hpp"
#include "fadingfl/mnist.hpp"

namespace fadingfl {
namespace {

std::string num(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string optional_num(const char* pattern, const std::optional<double>& v) {
  return v ? num(pattern, *v) : std::string();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::optional<double> cell_epsilon(const ExperimentConfig& cell, const RateSelection* sel) {
  if (const auto* t = std::get_if<FrflTargetPolicy>(&cell.policy)) return t->outage_target;
  if (sel) return sel->outage;
  return std::nullopt;
}

// Rate selection for an FRFL cell, resolved against the network that `data`
// implies; nullopt for SFL.
std::optional<RateSelection> cell_rate(const ExperimentConfig& cell, const Dataset& data) {
  if (std::holds_alternative<SflPolicy>(cell.policy)) return std::nullopt;
  const DenseNetwork net = cell.network(data.feature_dim, data.class_count);
  return frfl_select_rate(cell.link(net), cell.channel, cell.policy, cell.clients_per_round);
}

}  // namespace

std::vector<RatesRow> compute_rates(const RunConfig& config) {
  config.validate();
  const std::uint64_t seed = config.seeds.empty() ? 1 : config.seeds.front();
  std::vector<RatesRow> rows;
  for (const auto& model : config.channels) {
    for (const double a : config.quality_factors) {
      const LinkConfig cfg{1.0, a, 1};
      std::vector<double> mc;
      std::string mc_error;
      try {
        mc = expected_min_rate_curve_mc(cfg, model, config.rates_max_clients,
                                        MonteCarloMethod{config.monte_carlo_rounds, seed});
      } catch (const std::exception& e) {
        mc_error = e.what();
      }
      for (std::size_t c = 1; c <= config.rates_max_clients; ++c) {
        RatesRow row{model.kind(), a, c, std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN(), mc_error};
        if (mc_error.empty()) row.monte_carlo_per_hz = mc[c - 1];
        try {
          row.quadrature_per_hz = expected_min_rate(cfg, MinGainStats(c, model), QuadratureMethod{});
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_rates_csv(std::ostream& out, std::span<const RatesRow> rows) {
  out << "model,A,C,quadrature_per_hz,monte_carlo_per_hz,relative_difference,status\n";
  for (const auto& r : rows) {
    const bool ok = r.error.empty();
    out << r.model << ',' << num("%g", r.quality_factor) << ',' << r.clients << ','
        << (ok ? num("%.8f", r.quadrature_per_hz) : "") << ',' << (ok ? num("%.8f", r.monte_carlo_per_hz) : "")
        << ','
        << (ok ? num("%.6f", std::abs(r.quadrature_per_hz - r.monte_carlo_per_hz) / r.quadrature_per_hz) : "")
        << ',';
    if (ok) {
      out << "ok";
    } else {
      // Keep the message inside one CSV field.
      std::string msg = r.error;
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
      }
      out << "error: " << msg;
    }
    out << '\n';
  }
}

DatasetPair load_dataset(const RunConfig& config) {
  if (config.dataset == "synthetic") {
    const auto& s = config.synthetic;
    auto split = make_synthetic_split(s.spec, s.test_per_class, s.seed);
    return {std::move(split.train), std::move(split.test),
            "synthetic (" + std::to_string(s.spec.classes) + " classes, dim " + std::to_string(s.spec.dim) + ")"};
  }
  std::filesystem::path dir;
  if (config.dataset.rfind("mnist:", 0) == 0) {
    dir = config.dataset.substr(6);
  } else {
    const char* env = std::getenv(kDataDirEnv);
    if (env == nullptr || *env == '\0') {
      throw ConfigError(std::string("dataset 'mnist' needs a directory: use mnist:<dir> or set ") + kDataDirEnv);
    }
    dir = env;
  }
  auto data = load_mnist(dir);
  return {std::move(data.train), std::move(data.test), "mnist (" + dir.string() + ")"};
}

TrainResult run_training(const RunConfig& config, const DatasetPair& data, std::size_t jobs) {
  TrainResult result;
  result.cells = config.expand_grid();
  result.seeds = config.seeds;
  result.grid = run_grid(result.cells, data.train, data.test, result.seeds, jobs);
  return result;
}

std::string run_id(const ExperimentConfig& cell, std::uint64_t seed) {
  return cell.label() + "-s" + std::to_string(seed);
}

void write_trace_csv(std::ostream& out, const TrainResult& result) {
  out << "run_id,seed,policy,model,A,C,epsilon,round,start_s,duration_s,successes,accuracy\n";
  for (const auto& run : result.grid.runs) {
    if (!run.trace) continue;
    const ExperimentConfig& cell = result.cells[run.config_index];
    const ExperimentTrace& trace = *run.trace;
    const std::string prefix = run_id(cell, run.seed) + ',' + std::to_string(run.seed) + ',' +
                               policy_name(cell.policy) + ',' + cell.channel.kind() + ',' +
                               num("%g", cell.quality_factor) + ',' + std::to_string(cell.clients_per_round) +
                               ',' + optional_num("%.6f", cell_epsilon(cell, trace.fixed_rate ? &*trace.fixed_rate : nullptr)) + ',';
    out << prefix << "0,0.000000,0.000000,0," << num("%.6f", trace.initial_accuracy) << '\n';
    for (const auto& r : trace.rounds) {
      out << prefix << r.round << ',' << num("%.6f", r.start_s) << ',' << num("%.6f", r.duration_s) << ','
          << r.successes << ',' << num("%.6f", r.accuracy) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const TrainResult& result) {
  out << "cell,model,A,C,policy,epsilon,data_mode,payload_bits,rate_bps,alpha,premise_holds,replicates,"
         "failures,rounds_mean,rounds_min,rounds_max,final_accuracy_mean,final_accuracy_min,"
         "final_accuracy_max,reached_90,time_to_90_mean_s,reached_95,time_to_95_mean_s\n";
  for (const auto& cell : result.grid.cells) {
    const ExperimentConfig& cfg = result.cells[cell.config_index];
    // Any successful replicate carries the (seed-independent) rate selection.
    const ExperimentTrace* sample = nullptr;
    for (const auto& run : result.grid.runs) {
      if (run.config_index == cell.config_index && run.trace) {
        sample = &*run.trace;
        break;
      }
    }
    const RateSelection* sel = sample && sample->fixed_rate ? &*sample->fixed_rate : nullptr;
    const bool ok = cell.replicates > 0;
    out << cfg.label() << ',' << cfg.channel.kind() << ',' << num("%g", cfg.quality_factor) << ','
        << cfg.clients_per_round << ',' << policy_name(cfg.policy) << ','
        << optional_num("%.6f", cell_epsilon(cfg, sel)) << ',' << to_string(cfg.data_mode) << ','
        << (sample ? std::to_string(sample->payload_bits) : "") << ','
        << (sel ? num("%.3f", sel->rate_bps) : "") << ',' << (sel ? num("%.6f", sel->alpha) : "") << ','
        << (sel ? (sel->premise_holds() ? "yes" : "no") : "") << ',' << cell.replicates << ',' << cell.failures
        << ',' << (ok ? num("%.3f", cell.rounds_mean) : "") << ',' << (ok ? num("%.0f", cell.rounds_min) : "")
        << ',' << (ok ? num("%.0f", cell.rounds_max) : "") << ','
        << (ok ? num("%.6f", cell.final_accuracy_mean) : "") << ','
        << (ok ? num("%.6f", cell.final_accuracy_min) : "") << ','
        << (ok ? num("%.6f", cell.final_accuracy_max) : "") << ',' << cell.reached_90 << ','
        << optional_num("%.6f", cell.time_to_90_mean) << ',' << cell.reached_95 << ','
        << optional_num("%.6f", cell.time_to_95_mean) << '\n';
  }
}

int rates_command(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const auto rows = compute_rates(config);
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "rates.csv";
  auto out = open_output(path);
  write_rates_csv(out, rows);
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++failed;
      log << "FAILED " << r.model << " A=" << num("%g", r.quality_factor) << " C=" << r.clients << ": " << r.error
          << '\n';
    }
  }
  log << "wrote " << rows.size() << " rows to " << path.string() << '\n';
  return failed == 0 ? 0 : 1;
}

int train_command(const RunConfig& config, const std::filesystem::path& out_dir, std::size_t jobs,
                  std::ostream& log) {
  const auto cells = config.expand_grid();
  const DatasetPair data = load_dataset(config);
  log << "dataset: " << data.description << ", " << data.train.size() << " train / " << data.test.size()
      << " test\n";

  for (const auto& cell : cells) {
    try {
      const auto sel = cell_rate(cell, data.train);
      if (sel && !sel->premise_holds()) {
        log << "WARNING: " << cell.label() << ": fixed rate " << num("%.0f", sel->rate_bps)
            << " bit/s does not exceed E[R_min] = " << num("%.0f", sel->expected_min_rate_bps)
            << " bit/s (alpha = " << num("%.4f", sel->alpha) << "); the fixed-rate premise is violated\n";
      }
    } catch (const std::exception&) {
      // Reported per replicate by the grid run.
    }
  }

  log << "running " << cells.size() << " cells x " << config.seeds.size() << " seeds on "
      << std::max<std::size_t>(jobs, 1) << " thread(s)\n";
  const TrainResult result = run_training(config, data, jobs);

  std::filesystem::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "traces.csv");
    write_trace_csv(out, result);
  }
  {
    auto out = open_output(out_dir / "summary.csv");
    write_summary_csv(out, result);
  }

  std::size_t failed = 0;
  for (const auto& run : result.grid.runs) {
    if (run.error.empty()) continue;
    ++failed;
    log << "FAILED " << run_id(result.cells[run.config_index], run.seed) << ": " << run.error << '\n';
  }
  log << "wrote traces.csv and summary.csv to " << out_dir.string() << " (" << result.grid.runs.size()
      << " runs, " << failed << " failed)\n";
  return failed == 0 ? 0 : 1;
}

int validate_command(const ValidationOptions& options, std::ostream& out) {
  const auto results = run_validation(options);
  write_validation_report(out, results);
  return all_passed(results) ? 0 : 1;
}

}  // namespace fadingfl
