#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fadingfl/channel.hpp"
#include "fadingfl/linkmath.hpp"
#include "fadingfl/random.hpp"

namespace fadingfl {

using ClientId = std::uint32_t;

/// Synchronous FL with perfect CSI: every client sends at its own max rate.
struct SflPolicy {
  bool operator==(const SflPolicy&) const = default;
};

/// Fixed-rate FL parameterized by the target per-client outage probability.
struct FrflTargetPolicy {
  double outage_target = 0.5;
  bool operator==(const FrflTargetPolicy&) const = default;
};

/// Fixed-rate FL with an explicit global rate.
struct FrflFixedPolicy {
  double rate_bps = 1e6;
  bool operator==(const FrflFixedPolicy&) const = default;
};

using Policy = std::variant<SflPolicy, FrflTargetPolicy, FrflFixedPolicy>;

/// "sfl", "frfl" or "frfl_fixed".
std::string policy_name(const Policy& policy);
/// Throws std::invalid_argument when a target lies outside (0, 1) or a rate is not positive.
void validate_policy(const Policy& policy);

/// Result of picking R* for a fixed-rate policy, with the diagnostics of the
/// heuristic that R* should exceed the expected minimum rate.
struct RateSelection {
  double rate_bps = 0.0;
  double outage = 0.0;             // outage_probability(rate_bps)
  double expected_min_rate_bps = 0.0;
  double alpha = 0.0;              // rate_bps / expected_min_rate_bps

  bool premise_holds() const { return alpha > 1.0; }
};

/// R* for an FRFL policy: B log2(1 + A q(eps)) for a target, the given rate
/// for a fixed policy. Throws std::invalid_argument for SflPolicy. A violated
/// premise (alpha <= 1) is reported through RateSelection, not as an error.
RateSelection frfl_select_rate(const LinkConfig& cfg, const FadingModel& model,
                               const Policy& policy, std::size_t c);

/// Uniform subset of size c from {0, ..., n_total - 1} without replacement,
/// returned in ascending id order.
std::vector<ClientId> select_clients(std::size_t n_total, std::size_t c, RandomStream& rng);

struct RoundOutcome {
  std::vector<ClientId> selected;
  std::vector<ClientId> succeeded;       // subset of selected, in the same order
  std::vector<double> rate_bps;          // rate used by each selected client
  double duration_s = 0.0;               // +inf for a stalled uncapped SFL round
  bool capped = false;                   // T_ths cut the round short

  std::size_t success_count() const { return succeeded.size(); }
};

/// Runs one upload round. `gains[i]` is the gain of `selected[i]`.
///
/// SFL: each client uses its own rate and the round lasts until the slowest
/// finishes. If that exceeds `t_ths`, the round lasts `t_ths` and every client
/// still transmitting is dropped. A zero gain never finishes, so without a cap
/// the round is stalled (infinite duration, that client dropped).
///
/// FRFL: everyone uses the fixed rate, the round lasts Z / R*, and a client
/// succeeds iff its achievable rate is at least R*. Pass FrflFixedPolicy (or
/// the rate from frfl_select_rate); an unresolved FrflTargetPolicy throws.
RoundOutcome execute_round(const Policy& policy, const LinkConfig& cfg,
                           std::span<const ClientId> selected, std::span<const double> gains,
                           double t_ths = std::numeric_limits<double>::infinity());

}  // namespace fadingfl
