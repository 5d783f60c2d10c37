#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "fadingfl/channel.hpp"

namespace fadingfl {

/// Uplink parameters shared by all orthogonal channels of one experiment.
struct LinkConfig {
  double bandwidth_hz = 1e6;
  double quality_factor = 1.0;     // A = p phi / (N0 B), held constant by power control
  std::uint64_t payload_bits = 1;  // Z, size of the parameter vector in bits

  /// Throws std::invalid_argument unless every field is strictly positive.
  void validate() const;
  bool operator==(const LinkConfig&) const = default;
};

/// Distribution of the minimum gain over `client_count` iid draws of `base`.
class MinGainStats {
 public:
  MinGainStats(std::size_t client_count, FadingModel base);

  std::size_t client_count() const noexcept { return client_count_; }
  const FadingModel& base() const noexcept { return base_; }

  /// 1 - (1 - F(h))^C
  double cdf(double h) const;
  /// C (1 - F(h))^(C-1) f(h)
  double pdf(double h) const;
  /// Inverse of cdf, through the base quantile at 1 - (1 - p)^(1/C).
  double quantile(double p) const;

 private:
  std::size_t client_count_;
  FadingModel base_;
};

/// B log2(1 + h A).
double achievable_rate(const LinkConfig& cfg, double h);

/// Smallest gain that supports `rate`: (2^(rate/B) - 1) / A.
double gain_threshold(const LinkConfig& cfg, double rate);

double min_gain_cdf(const MinGainStats& stats, double h);
double min_gain_pdf(const MinGainStats& stats, double h);

struct QuadratureMethod {};
struct MonteCarloMethod {
  std::size_t rounds = 100000;
  std::uint64_t seed = 1;
};
using ExpectationMethod = std::variant<QuadratureMethod, MonteCarloMethod>;

/// E[B log2(1 + A h_min)]. Quadrature integrates against the min-gain density
/// over [0, q_min(1 - 1e-7)] to an absolute tolerance of 1e-7 bit/s/Hz and
/// throws NumericFailure if refinement stalls. Monte Carlo simulates whole
/// rounds of C draws and averages the rate at the minimum.
double expected_min_rate(const LinkConfig& cfg, const MinGainStats& stats,
                         const ExpectationMethod& method = QuadratureMethod{});

/// Monte Carlo E[R_min] for every C in 1..max_clients from one set of rounds:
/// each round draws max_clients gains and the running minimum of the first C
/// gives the C-client sample. Entry C-1 of the result is the C-client value.
std::vector<double> expected_min_rate_curve_mc(const LinkConfig& cfg, const FadingModel& model,
                                               std::size_t max_clients,
                                               const MonteCarloMethod& method);

/// Probability that a client cannot sustain `rate`: F(gain_threshold(rate)).
double outage_probability(const LinkConfig& cfg, const FadingModel& model, double rate);

/// c (1 - outage_probability(rate)).
double expected_successful_clients(const LinkConfig& cfg, const FadingModel& model, double rate,
                                   std::size_t c);

/// Z / rate. Throws std::domain_error for rate <= 0.
double frfl_round_duration(const LinkConfig& cfg, double rate);

/// max_k Z / R_k, i.e. Z over the rate at the minimum gain. Returns nullopt
/// when some gain is zero: that client can never finish and the round stalls.
std::optional<double> sfl_round_duration(const LinkConfig& cfg, std::span<const double> gains);

}  // namespace fadingfl
