#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fadingfl/simdriver.hpp"

namespace fadingfl {

struct SyntheticSettings {
  SyntheticSpec spec{10, 6000, 784, 9.0, 1.0};
  std::size_t test_per_class = 1000;
  std::uint64_t seed = 2024;
  bool operator==(const SyntheticSettings&) const = default;
};

/// Run configuration file. The grid lists expand to a cartesian product of
/// ExperimentConfig cells (see expand_grid); the scalars apply to every cell.
struct RunConfig {
  // grid axes
  std::vector<FadingModel> channels{FadingModel::rayleigh(1.0)};
  std::vector<double> quality_factors{1.0, 10.0};
  std::vector<std::size_t> clients_per_round{10, 20, 40};
  std::vector<Policy> policies{SflPolicy{}, FrflTargetPolicy{0.2}, FrflTargetPolicy{0.5}};
  std::vector<DataMode> data_modes{DataMode::iid, DataMode::noniid};

  // shared scalars
  std::size_t n_total = 100;
  double bandwidth_hz = 1e6;
  double budget_s = 30.0;
  double local_compute_s = 0.0;
  std::optional<double> round_cap_s;
  std::vector<std::size_t> hidden_layers{64};
  std::uint32_t bits_per_param = 32;
  std::optional<std::uint64_t> payload_bits;
  TrainingHyper hyper;
  std::size_t samples_per_client = 600;
  NonIidOptions noniid{1, 10, 100, 600};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  // data and output
  std::string dataset = "synthetic";  // "synthetic", "mnist" or "mnist:<dir>"
  SyntheticSettings synthetic;
  std::optional<std::string> output_dir;

  // `rates` subcommand
  std::size_t rates_max_clients = 40;
  std::size_t monte_carlo_rounds = 100000;

  bool operator==(const RunConfig&) const = default;

  /// Throws ConfigError on invalid values.
  void validate() const;
  /// Cells ordered channel, A, C, policy, data mode (last axis fastest).
  std::vector<ExperimentConfig> expand_grid() const;
};

/// Parses JSON text. Unknown keys, wrong types and invalid values raise
/// ConfigError; absent keys keep their defaults.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical JSON with every key present; parses back to an equal RunConfig.
std::string serialize_run_config(const RunConfig& config);

/// "1,2,5-8" -> {1,2,5,6,7,8}. Throws ConfigError on malformed input.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace fadingfl
