#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fadingfl/config.hpp"
#include "fadingfl/validate.hpp"

namespace fadingfl {

/// Environment variable naming the MNIST directory used by `--dataset mnist`.
inline constexpr const char* kDataDirEnv = "FADINGFL_DATA_DIR";

// ---- rates -----------------------------------------------------------------

struct RatesRow {
  std::string model;
  double quality_factor = 0.0;
  std::size_t clients = 0;
  double quadrature_per_hz = 0.0;  // NaN when the cell failed
  double monte_carlo_per_hz = 0.0;
  std::string error;
};

/// E[R_min] / B for C = 1..rates_max_clients, every configured channel and A.
std::vector<RatesRow> compute_rates(const RunConfig& config);

/// Header: model,A,C,quadrature_per_hz,monte_carlo_per_hz,relative_difference,status
void write_rates_csv(std::ostream& out, std::span<const RatesRow> rows);

// ---- train -----------------------------------------------------------------

struct DatasetPair {
  Dataset train;
  Dataset test;
  std::string description;
};

/// Resolves config.dataset: "synthetic", "mnist:<dir>", or "mnist" with the
/// directory taken from FADINGFL_DATA_DIR.
DatasetPair load_dataset(const RunConfig& config);

struct TrainResult {
  std::vector<ExperimentConfig> cells;
  std::vector<std::uint64_t> seeds;
  GridResult grid;
};

TrainResult run_training(const RunConfig& config, const DatasetPair& data, std::size_t jobs);

/// Run identifier used in the trace CSV, e.g. "rayleigh-A1-C20-sfl-iid-s3".
std::string run_id(const ExperimentConfig& cell, std::uint64_t seed);

/// Header: run_id,seed,policy,model,A,C,epsilon,round,start_s,duration_s,successes,accuracy
/// Round 0 carries the initial model's accuracy. epsilon is the per-client
/// outage probability of the fixed rate and is empty under SFL.
void write_trace_csv(std::ostream& out, const TrainResult& result);

/// One row per grid cell with replicate statistics and the FRFL diagnostics.
void write_summary_csv(std::ostream& out, const TrainResult& result);

// ---- subcommand entry points (return the process exit code) ---------------

int rates_command(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
int train_command(const RunConfig& config, const std::filesystem::path& out_dir, std::size_t jobs,
                  std::ostream& log);
int validate_command(const ValidationOptions& options, std::ostream& out);

}  // namespace fadingfl
