#include "fadingfl/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fadingfl/error.hpp"

namespace fadingfl::special {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 100000;
constexpr double kTiny = 1e-300;

double log_prefactor(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

// P(a, x) by its power series; valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * std::exp(log_prefactor(a, x));
    }
  }
  throw NumericFailure("incomplete gamma series did not converge");
}

// Q(a, x) by modified Lentz continued fraction; valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return std::exp(log_prefactor(a, x)) * h;
    }
  }
  throw NumericFailure("incomplete gamma continued fraction did not converge");
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("incomplete gamma requires a > 0");
  if (!(x >= 0.0)) throw std::domain_error("incomplete gamma requires x >= 0");
}

// Range of Poisson(lambda) indices holding all but a negligible tail.
struct PoissonWindow {
  long lo;
  long hi;
};

PoissonWindow poisson_window(double lambda) {
  const double spread = 12.0 * std::sqrt(lambda);
  const long lo = static_cast<long>(std::max(0.0, std::floor(lambda - spread - 10.0)));
  const long hi = static_cast<long>(std::ceil(lambda + spread + 40.0));
  return {lo, hi};
}

double poisson_weight(double lambda, long j) {
  if (lambda == 0.0) return j == 0 ? 1.0 : 0.0;
  return std::exp(-lambda + static_cast<double>(j) * std::log(lambda) -
                  std::lgamma(static_cast<double>(j) + 1.0));
}

// x^j e^{-x} / j!
double poisson_term(double x, long j) {
  const double jd = static_cast<double>(j);
  return std::exp(-x + jd * std::log(x) - std::lgamma(jd + 1.0));
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double bessel_i0_scaled(double x) {
  if (x < 0.0) x = -x;
  if (x < 500.0) {
    return std::cyl_bessel_i(0.0, x) * std::exp(-x);
  }
  const double inv = 1.0 / x;
  const double series = 1.0 + inv * (1.0 / 8.0 + inv * (9.0 / 128.0 + inv * (225.0 / 3072.0)));
  return series / std::sqrt(2.0 * std::numbers::pi * x);
}

double marcum_p1(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::domain_error("Marcum Q requires a, b >= 0");
  const double x = 0.5 * b * b;
  if (x == 0.0) return 0.0;
  const double lambda = 0.5 * a * a;
  if (lambda == 0.0) return -std::expm1(-x);

  const auto [lo, hi] = poisson_window(lambda);
  // Walk j downward so that P(j, x) = P(j + 1, x) + x^j e^{-x} / j! only adds.
  double p_next = gamma_p(static_cast<double>(hi) + 1.0, x);  // P(j + 1, x)
  double sum = 0.0;
  for (long j = hi; j >= lo; --j) {
    sum += poisson_weight(lambda, j) * p_next;
    if (j > 0) p_next += poisson_term(x, j);
  }
  return std::min(sum, 1.0);
}

double marcum_q1(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::domain_error("Marcum Q requires a, b >= 0");
  const double x = 0.5 * b * b;
  if (x == 0.0) return 1.0;
  const double lambda = 0.5 * a * a;
  if (lambda == 0.0) return std::exp(-x);

  const auto [lo, hi] = poisson_window(lambda);
  // Upward: Q(j + 1, x) = Q(j, x) + x^j e^{-x} / j!.
  double q_next = gamma_q(static_cast<double>(lo) + 1.0, x);  // Q(j + 1, x)
  double sum = 0.0;
  for (long j = lo; j <= hi; ++j) {
    sum += poisson_weight(lambda, j) * q_next;
    q_next += poisson_term(x, j + 1);
  }
  return std::min(sum, 1.0);
}

}  // namespace fadingfl::special
