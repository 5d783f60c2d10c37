#include "fadingfl/linkmath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fadingfl/quadrature.hpp"
#include "overloaded.hpp"

namespace fadingfl {

void LinkConfig::validate() const {
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
    throw std::invalid_argument("bandwidth_hz must be positive");
  }
  if (!(quality_factor > 0.0) || !std::isfinite(quality_factor)) {
    throw std::invalid_argument("quality_factor must be positive");
  }
  if (payload_bits == 0) throw std::invalid_argument("payload_bits must be positive");
}

MinGainStats::MinGainStats(std::size_t client_count, FadingModel base)
    : client_count_(client_count), base_(base) {
  if (client_count == 0) throw std::invalid_argument("client_count must be at least 1");
}

double MinGainStats::cdf(double h) const {
  const double f = base_.cdf(h);
  if (f >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(client_count_) * std::log1p(-f));
}

double MinGainStats::pdf(double h) const {
  const double f = base_.cdf(h);
  const double density = base_.pdf(h);
  if (client_count_ == 1) return density;
  if (f >= 1.0) return 0.0;
  const double c = static_cast<double>(client_count_);
  return c * std::exp((c - 1.0) * std::log1p(-f)) * density;
}

double MinGainStats::quantile(double p) const {
  if (!(p >= 0.0) || !(p < 1.0)) {
    throw std::domain_error("quantile probability must lie in [0, 1)");
  }
  const double base_p = -std::expm1(std::log1p(-p) / static_cast<double>(client_count_));
  return base_.quantile(base_p);
}

double achievable_rate(const LinkConfig& cfg, double h) {
  if (!(h >= 0.0)) throw std::domain_error("channel gain must be nonnegative");
  return cfg.bandwidth_hz * std::log2(1.0 + h * cfg.quality_factor);
}

double gain_threshold(const LinkConfig& cfg, double rate) {
  if (!(rate >= 0.0)) throw std::domain_error("rate must be nonnegative");
  return std::expm1(rate / cfg.bandwidth_hz * std::numbers::ln2) / cfg.quality_factor;
}

double min_gain_cdf(const MinGainStats& stats, double h) { return stats.cdf(h); }

double min_gain_pdf(const MinGainStats& stats, double h) { return stats.pdf(h); }

double expected_min_rate(const LinkConfig& cfg, const MinGainStats& stats,
                         const ExpectationMethod& method) {
  const double a = cfg.quality_factor;
  const double per_hz = std::visit(
      detail::Overloaded{
          [&](const QuadratureMethod&) {
            const double upper = stats.quantile(1.0 - 1e-7);
            return integrate([&](double h) { return std::log2(1.0 + h * a) * stats.pdf(h); }, 0.0,
                             upper, QuadratureOptions{.abs_tolerance = 1e-7});
          },
          [&](const MonteCarloMethod& mc) {
            if (mc.rounds == 0) throw std::invalid_argument("Monte Carlo needs at least one round");
            RandomStream rng(mc.seed, StreamTag::monte_carlo);
            double sum = 0.0;
            for (std::size_t r = 0; r < mc.rounds; ++r) {
              double h_min = std::numeric_limits<double>::infinity();
              for (std::size_t k = 0; k < stats.client_count(); ++k) {
                h_min = std::min(h_min, stats.base().sample(rng));
              }
              sum += std::log2(1.0 + h_min * a);
            }
            return sum / static_cast<double>(mc.rounds);
          }},
      method);
  return cfg.bandwidth_hz * per_hz;
}

std::vector<double> expected_min_rate_curve_mc(const LinkConfig& cfg, const FadingModel& model,
                                               std::size_t max_clients,
                                               const MonteCarloMethod& method) {
  cfg.validate();
  if (max_clients == 0) throw std::invalid_argument("client count must be at least 1");
  if (method.rounds == 0) throw std::invalid_argument("Monte Carlo needs at least one round");
  RandomStream rng(method.seed, StreamTag::monte_carlo);
  std::vector<double> sums(max_clients, 0.0);
  for (std::size_t r = 0; r < method.rounds; ++r) {
    double h_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < max_clients; ++k) {
      h_min = std::min(h_min, model.sample(rng));
      sums[k] += std::log2(1.0 + h_min * cfg.quality_factor);
    }
  }
  for (double& s : sums) s *= cfg.bandwidth_hz / static_cast<double>(method.rounds);
  return sums;
}

double outage_probability(const LinkConfig& cfg, const FadingModel& model, double rate) {
  return model.cdf(gain_threshold(cfg, rate));
}

double expected_successful_clients(const LinkConfig& cfg, const FadingModel& model, double rate,
                                   std::size_t c) {
  if (c == 0) throw std::invalid_argument("client count must be at least 1");
  return static_cast<double>(c) * (1.0 - outage_probability(cfg, model, rate));
}

double frfl_round_duration(const LinkConfig& cfg, double rate) {
  if (!(rate > 0.0)) throw std::domain_error("fixed rate must be positive");
  return static_cast<double>(cfg.payload_bits) / rate;
}

std::optional<double> sfl_round_duration(const LinkConfig& cfg, std::span<const double> gains) {
  if (gains.empty()) throw std::invalid_argument("round needs at least one gain");
  const double h_min = *std::min_element(gains.begin(), gains.end());
  if (!(h_min >= 0.0)) throw std::domain_error("channel gain must be nonnegative");
  if (h_min == 0.0) return std::nullopt;
  return static_cast<double>(cfg.payload_bits) / achievable_rate(cfg, h_min);
}

}  // namespace fadingfl
