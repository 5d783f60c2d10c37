#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fadingfl/channel.hpp"
#include "fadingfl/dataset.hpp"
#include "fadingfl/linkmath.hpp"
#include "fadingfl/nn.hpp"
#include "fadingfl/scheduler.hpp"

namespace fadingfl {

enum class DataMode { iid, noniid };

std::string to_string(DataMode mode);

/// One cell of the experiment grid.
struct ExperimentConfig {
  std::size_t n_total = 100;
  std::size_t clients_per_round = 20;
  FadingModel channel = FadingModel::rayleigh(1.0);
  double bandwidth_hz = 1e6;
  double quality_factor = 1.0;
  Policy policy = SflPolicy{};
  double budget_s = 30.0;
  double local_compute_s = 0.0;
  double round_cap_s = std::numeric_limits<double>::infinity();  // T_ths
  DataMode data_mode = DataMode::iid;
  TrainingHyper hyper;
  std::vector<std::size_t> hidden_layers{64};
  std::size_t samples_per_client = 600;  // iid mode
  NonIidOptions noniid;
  std::uint32_t bits_per_param = 32;
  std::optional<std::uint64_t> payload_bits;  // overrides bits_per_param * parameter count

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  /// Network for a dataset with the given input width and class count.
  DenseNetwork network(std::size_t input_dim, std::size_t classes) const;
  /// Link parameters, with Z resolved against `net`.
  LinkConfig link(const DenseNetwork& net) const;
  /// Stable identifier such as "rayleigh-A1-C20-frfl0.5-noniid".
  std::string label() const;
};

struct RoundRecord {
  std::size_t round = 0;      // 1-based
  double start_s = 0.0;
  double duration_s = 0.0;    // local compute plus upload
  std::size_t selected = 0;
  std::size_t successes = 0;
  bool capped = false;
  double accuracy = 0.0;      // test accuracy after aggregation
};

struct ExperimentTrace {
  std::uint64_t seed = 0;
  std::uint64_t payload_bits = 0;
  std::optional<RateSelection> fixed_rate;  // FRFL policies only
  double initial_accuracy = 0.0;
  std::vector<RoundRecord> rounds;

  std::size_t rounds_completed() const { return rounds.size(); }
  double elapsed_s() const;
  double final_accuracy() const;
};

/// Runs one time-budgeted replicate. Each round: select clients, draw one gain
/// per client, run the upload policy, train and aggregate the delivered
/// updates, then evaluate on `test`. A round that would end past the budget is
/// not started. Client selection, partitioning, initialisation and channel
/// draws use independent streams derived from `seed`, so policies compared at
/// the same seed see the same data split and initial model.
ExperimentTrace run_replicate(const ExperimentConfig& config, const Dataset& train,
                              const Dataset& test, std::uint64_t seed);

/// Earliest recorded time (t = 0 for the initial model, round end otherwise)
/// at which accuracy >= threshold; nullopt if never reached.
std::optional<double> time_to_accuracy(const ExperimentTrace& trace, double threshold);

struct RunResult {
  std::size_t config_index = 0;
  std::uint64_t seed = 0;
  std::optional<ExperimentTrace> trace;
  std::string error;  // set when the replicate failed
};

struct CellSummary {
  std::size_t config_index = 0;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  double rounds_mean = 0.0;
  double rounds_min = 0.0;
  double rounds_max = 0.0;
  double final_accuracy_mean = 0.0;
  double final_accuracy_min = 0.0;
  double final_accuracy_max = 0.0;
  std::size_t reached_90 = 0;
  std::optional<double> time_to_90_mean;  // over replicates that reached it
  std::size_t reached_95 = 0;
  std::optional<double> time_to_95_mean;
};

struct GridResult {
  std::vector<RunResult> runs;      // config-major, then seed order
  std::vector<CellSummary> cells;   // one per config
  bool all_succeeded() const;
};

/// Runs every (config, seed) pair on up to `jobs` threads. Results are placed
/// by index, so output does not depend on scheduling. A failing replicate is
/// recorded in its RunResult and the grid continues.
GridResult run_grid(std::span<const ExperimentConfig> configs, const Dataset& train,
                    const Dataset& test, std::span<const std::uint64_t> seeds,
                    std::size_t jobs = 1);

}  // namespace fadingfl
