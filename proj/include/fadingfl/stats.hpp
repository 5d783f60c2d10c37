#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

// Goodness-of-fit helpers shared by the validation report and the tests.

namespace fadingfl::stats {

/// Two-sided one-sample Kolmogorov-Smirnov statistic of `samples` against
/// `cdf`. The samples are sorted in place.
double ks_statistic(std::vector<double>& samples, const std::function<double(double)>& cdf);

/// Asymptotic KS critical value sqrt(-ln(alpha / 2) / 2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha);

/// Pearson chi-square statistic; bins with zero expectation are skipped.
double chi_square_statistic(std::span<const double> observed, std::span<const double> expected);

/// Upper-tail critical value of the chi-square distribution.
double chi_square_critical_value(double degrees_of_freedom, double alpha);

double mean(std::span<const double> values);

/// Standard error of a Bernoulli frequency estimate with success probability p.
double binomial_standard_error(double p, std::size_t n);

}  // namespace fadingfl::stats
