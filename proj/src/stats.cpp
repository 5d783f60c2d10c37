#include "fadingfl/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fadingfl::stats {

double ks_statistic(std::vector<double>& samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("KS statistic needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("bad KS parameters");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

double chi_square_statistic(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size()) throw std::invalid_argument("bin count mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    const double diff = observed[i] - expected[i];
    sum += diff * diff / expected[i];
  }
  return sum;
}

double chi_square_critical_value(double degrees_of_freedom, double alpha) {
  const boost::math::chi_squared_distribution<double> dist(degrees_of_freedom);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty range");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double binomial_standard_error(double p, std::size_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace fadingfl::stats
