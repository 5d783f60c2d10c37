#include "fadingfl/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "overloaded.hpp"

namespace fadingfl {

using detail::Overloaded;

std::string policy_name(const Policy& policy) {
  return std::visit(Overloaded{[](const SflPolicy&) { return std::string("sfl"); },
                               [](const FrflTargetPolicy&) { return std::string("frfl"); },
                               [](const FrflFixedPolicy&) { return std::string("frfl_fixed"); }},
                    policy);
}

void validate_policy(const Policy& policy) {
  std::visit(Overloaded{[](const SflPolicy&) {},
                        [](const FrflTargetPolicy& p) {
                          if (!(p.outage_target > 0.0 && p.outage_target < 1.0)) {
                            throw std::invalid_argument("FRFL outage target must lie in (0, 1)");
                          }
                        },
                        [](const FrflFixedPolicy& p) {
                          if (!(p.rate_bps > 0.0) || !std::isfinite(p.rate_bps)) {
                            throw std::invalid_argument("FRFL fixed rate must be positive");
                          }
                        }},
             policy);
}

RateSelection frfl_select_rate(const LinkConfig& cfg, const FadingModel& model,
                               const Policy& policy, std::size_t c) {
  validate_policy(policy);
  const double rate = std::visit(
      Overloaded{[](const SflPolicy&) -> double {
                   throw std::invalid_argument("SFL has no fixed rate to select");
                 },
                 [&](const FrflTargetPolicy& p) {
                   return achievable_rate(cfg, model.quantile(p.outage_target));
                 },
                 [](const FrflFixedPolicy& p) { return p.rate_bps; }},
      policy);

  RateSelection out;
  out.rate_bps = rate;
  out.outage = outage_probability(cfg, model, rate);
  out.expected_min_rate_bps = expected_min_rate(cfg, MinGainStats(c, model));
  out.alpha = rate / out.expected_min_rate_bps;
  return out;
}

std::vector<ClientId> select_clients(std::size_t n_total, std::size_t c, RandomStream& rng) {
  if (c == 0) throw std::invalid_argument("must select at least one client");
  if (c > n_total) throw std::invalid_argument("cannot select more clients than exist");
  std::vector<ClientId> pool(n_total);
  std::iota(pool.begin(), pool.end(), ClientId{0});
  // Partial Fisher-Yates: the first c slots end up a uniform c-subset.
  for (std::size_t i = 0; i < c; ++i) {
    const std::size_t j = i + rng.index(n_total - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(c);
  std::sort(pool.begin(), pool.end());
  return pool;
}

RoundOutcome execute_round(const Policy& policy, const LinkConfig& cfg,
                           std::span<const ClientId> selected, std::span<const double> gains,
                           double t_ths) {
  if (selected.size() != gains.size()) {
    throw std::invalid_argument("one gain is required per selected client");
  }
  if (selected.empty()) throw std::invalid_argument("round needs at least one client");
  if (!(t_ths > 0.0)) throw std::invalid_argument("round cap must be positive");
  validate_policy(policy);

  RoundOutcome out;
  out.selected.assign(selected.begin(), selected.end());
  out.rate_bps.reserve(gains.size());

  if (std::holds_alternative<SflPolicy>(policy)) {
    for (const double h : gains) out.rate_bps.push_back(achievable_rate(cfg, h));
    const auto slowest = sfl_round_duration(cfg, gains);
    const double uncapped = slowest.value_or(std::numeric_limits<double>::infinity());
    if (uncapped <= t_ths) {
      out.duration_s = uncapped;
      out.succeeded = out.selected;
      return out;
    }
    out.duration_s = t_ths;
    out.capped = std::isfinite(t_ths);
    const double z = static_cast<double>(cfg.payload_bits);
    for (std::size_t i = 0; i < gains.size(); ++i) {
      const double rate = out.rate_bps[i];
      if (rate > 0.0 && z / rate <= t_ths) out.succeeded.push_back(selected[i]);
    }
    return out;
  }

  const auto* fixed = std::get_if<FrflFixedPolicy>(&policy);
  if (fixed == nullptr) {
    throw std::invalid_argument("resolve the FRFL outage target to a rate before executing rounds");
  }
  const double rate = fixed->rate_bps;
  out.duration_s = frfl_round_duration(cfg, rate);
  for (std::size_t i = 0; i < gains.size(); ++i) {
    out.rate_bps.push_back(rate);
    if (achievable_rate(cfg, gains[i]) >= rate) out.succeeded.push_back(selected[i]);
  }
  if (out.duration_s > t_ths) {
    // A fixed rate that cannot meet the cap delivers nothing.
    out.duration_s = t_ths;
    out.capped = true;
    out.succeeded.clear();
  }
  return out;
}

}  // namespace fadingfl
