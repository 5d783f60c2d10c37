#include "fadingfl/simdriver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <stdexcept>
#include <thread>

#include "fadingfl/error.hpp"

namespace fadingfl {
namespace {

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::uint64_t training_stream_index(std::size_t round, ClientId client) {
  return (static_cast<std::uint64_t>(round) << 32) | client;
}

}  // namespace

std::string to_string(DataMode mode) { return mode == DataMode::iid ? "iid" : "noniid"; }

void ExperimentConfig::validate() const {
  if (n_total == 0) throw std::invalid_argument("n_total must be positive");
  if (clients_per_round == 0 || clients_per_round > n_total) {
    throw std::invalid_argument("clients_per_round must lie in [1, n_total]");
  }
  if (!(budget_s > 0.0) || !std::isfinite(budget_s)) throw std::invalid_argument("budget_s must be positive");
  if (!(local_compute_s >= 0.0) || !std::isfinite(local_compute_s)) {
    throw std::invalid_argument("local_compute_s must be nonnegative");
  }
  if (!(round_cap_s > 0.0)) throw std::invalid_argument("round_cap_s must be positive");
  if (bits_per_param == 0) throw std::invalid_argument("bits_per_param must be positive");
  if (payload_bits && *payload_bits == 0) throw std::invalid_argument("payload_bits must be positive");
  if (data_mode == DataMode::iid && samples_per_client == 0) {
    throw std::invalid_argument("samples_per_client must be positive");
  }
  LinkConfig{bandwidth_hz, quality_factor, 1}.validate();
  hyper.validate();
  validate_policy(policy);
}

DenseNetwork ExperimentConfig::network(std::size_t input_dim, std::size_t classes) const {
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), hidden_layers.begin(), hidden_layers.end());
  sizes.push_back(classes);
  return DenseNetwork(std::move(sizes));
}

LinkConfig ExperimentConfig::link(const DenseNetwork& net) const {
  LinkConfig cfg{bandwidth_hz, quality_factor,
                 payload_bits.value_or(static_cast<std::uint64_t>(bits_per_param) *
                                       net.parameter_count())};
  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::label() const {
  std::string policy_part = policy_name(policy);
  if (const auto* t = std::get_if<FrflTargetPolicy>(&policy)) {
    policy_part += short_number(t->outage_target);
  } else if (const auto* f = std::get_if<FrflFixedPolicy>(&policy)) {
    policy_part += short_number(f->rate_bps);
  }
  return channel.kind() + "-A" + short_number(quality_factor) + "-C" +
         std::to_string(clients_per_round) + "-" + policy_part + "-" + to_string(data_mode);
}

double ExperimentTrace::elapsed_s() const {
  if (rounds.empty()) return 0.0;
  return rounds.back().start_s + rounds.back().duration_s;
}

double ExperimentTrace::final_accuracy() const {
  return rounds.empty() ? initial_accuracy : rounds.back().accuracy;
}

ExperimentTrace run_replicate(const ExperimentConfig& config, const Dataset& train,
                              const Dataset& test, std::uint64_t seed) {
  config.validate();
  if (train.feature_dim != test.feature_dim || train.class_count != test.class_count) {
    throw std::invalid_argument("train and test sets disagree on shape");
  }
  const DenseNetwork net = config.network(train.feature_dim, train.class_count);
  const LinkConfig link = config.link(net);

  RandomStream partition_rng(seed, StreamTag::partition);
  RandomStream init_rng(seed, StreamTag::init);
  RandomStream selection_rng(seed, StreamTag::selection);
  RandomStream channel_rng(seed, StreamTag::channel);

  const auto clients =
      config.data_mode == DataMode::iid
          ? partition_iid(train, config.n_total, config.samples_per_client, partition_rng)
          : partition_noniid(train, config.n_total, config.noniid, partition_rng);
  ModelParams global = net.initialize(init_rng);

  ExperimentTrace trace;
  trace.seed = seed;
  trace.payload_bits = link.payload_bits;

  Policy round_policy = config.policy;
  if (!std::holds_alternative<SflPolicy>(config.policy)) {
    trace.fixed_rate =
        frfl_select_rate(link, config.channel, config.policy, config.clients_per_round);
    round_policy = FrflFixedPolicy{trace.fixed_rate->rate_bps};
  }

  trace.initial_accuracy = evaluate_accuracy(net, global, test);

  double clock = 0.0;
  std::vector<double> gains(config.clients_per_round);
  for (std::size_t round = 1;; ++round) {
    const auto selected = select_clients(config.n_total, config.clients_per_round, selection_rng);
    for (double& h : gains) h = config.channel.sample(channel_rng);
    const RoundOutcome outcome =
        execute_round(round_policy, link, selected, gains, config.round_cap_s);
    const double length = config.local_compute_s + outcome.duration_s;
    if (!(clock + length <= config.budget_s)) break;

    // Undelivered updates are discarded by the server, so they are not trained.
    std::vector<ClientUpdate> updates;
    updates.reserve(selected.size());
    for (const ClientId id : selected) {
      const bool delivered = std::find(outcome.succeeded.begin(), outcome.succeeded.end(), id) !=
                             outcome.succeeded.end();
      const ClientDataset& local = clients[id];
      if (!delivered || local.empty()) {
        updates.push_back({std::nullopt, 0});
        continue;
      }
      RandomStream train_rng(seed, StreamTag::training, training_stream_index(round, id));
      updates.push_back({local_train(net, global, train, local, config.hyper, train_rng), local.size()});
    }
    global = fedavg_aggregate(updates, global);

    RoundRecord record;
    record.round = round;
    record.start_s = clock;
    record.duration_s = length;
    record.selected = selected.size();
    record.successes = outcome.success_count();
    record.capped = outcome.capped;
    record.accuracy = evaluate_accuracy(net, global, test);
    trace.rounds.push_back(record);
    clock += length;
  }
  return trace;
}

std::optional<double> time_to_accuracy(const ExperimentTrace& trace, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("accuracy threshold must lie in [0, 1]");
  }
  if (trace.initial_accuracy >= threshold) return 0.0;
  for (const auto& r : trace.rounds) {
    if (r.accuracy >= threshold) return r.start_s + r.duration_s;
  }
  return std::nullopt;
}

bool GridResult::all_succeeded() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunResult& r) { return r.error.empty(); });
}

GridResult run_grid(std::span<const ExperimentConfig> configs, const Dataset& train,
                    const Dataset& test, std::span<const std::uint64_t> seeds, std::size_t jobs) {
  GridResult result;
  result.runs.resize(configs.size() * seeds.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      result.runs[c * seeds.size() + s].config_index = c;
      result.runs[c * seeds.size() + s].seed = seeds[s];
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < result.runs.size(); i = next.fetch_add(1)) {
      RunResult& run = result.runs[i];
      try {
        run.trace = run_replicate(configs[run.config_index], train, test, run.seed);
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, result.runs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t c = 0; c < configs.size(); ++c) {
    CellSummary cell;
    cell.config_index = c;
    double t90 = 0.0;
    double t95 = 0.0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const RunResult& run = result.runs[c * seeds.size() + s];
      if (!run.trace) {
        ++cell.failures;
        continue;
      }
      const auto& trace = *run.trace;
      const double rounds = static_cast<double>(trace.rounds_completed());
      const double acc = trace.final_accuracy();
      if (cell.replicates == 0) {
        cell.rounds_min = cell.rounds_max = rounds;
        cell.final_accuracy_min = cell.final_accuracy_max = acc;
      }
      ++cell.replicates;
      cell.rounds_mean += rounds;
      cell.rounds_min = std::min(cell.rounds_min, rounds);
      cell.rounds_max = std::max(cell.rounds_max, rounds);
      cell.final_accuracy_mean += acc;
      cell.final_accuracy_min = std::min(cell.final_accuracy_min, acc);
      cell.final_accuracy_max = std::max(cell.final_accuracy_max, acc);
      if (const auto t = time_to_accuracy(trace, 0.90)) {
        ++cell.reached_90;
        t90 += *t;
      }
      if (const auto t = time_to_accuracy(trace, 0.95)) {
        ++cell.reached_95;
        t95 += *t;
      }
    }
    if (cell.replicates > 0) {
      cell.rounds_mean /= static_cast<double>(cell.replicates);
      cell.final_accuracy_mean /= static_cast<double>(cell.replicates);
    }
    if (cell.reached_90 > 0) cell.time_to_90_mean = t90 / static_cast<double>(cell.reached_90);
    if (cell.reached_95 > 0) cell.time_to_95_mean = t95 / static_cast<double>(cell.reached_95);
    result.cells.push_back(cell);
  }
  return result;
}

}  // namespace fadingfl
