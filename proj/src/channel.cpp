#include "fadingfl/channel.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fadingfl/special.hpp"
#include "overloaded.hpp"

namespace fadingfl {
namespace {

using detail::Overloaded;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

void require_gain(double h) {
  if (!(h >= 0.0)) throw std::domain_error("channel gain must be nonnegative");
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double nakagami_log_pdf(const NakagamiParams& p, double h) {
  const double m = p.m;
  return std::log(2.0) + m * std::log(m / p.sigma2) - std::lgamma(m) +
         (2.0 * m - 1.0) * std::log(h) - m * h * h / p.sigma2;
}

}  // namespace

FadingModel FadingModel::rayleigh(double sigma2) {
  require_positive(sigma2, "Rayleigh sigma2");
  return FadingModel(RayleighParams{sigma2});
}

FadingModel FadingModel::rician(double k_factor, double sigma2) {
  require_positive(sigma2, "Rician sigma2");
  if (!(k_factor >= 0.0) || !std::isfinite(k_factor)) {
    throw std::invalid_argument("Rician K factor must be nonnegative and finite");
  }
  return FadingModel(RicianParams{k_factor, sigma2});
}

FadingModel FadingModel::rician_db(double k_factor_db, double sigma2) {
  return rician(std::pow(10.0, k_factor_db / 10.0), sigma2);
}

FadingModel FadingModel::nakagami(double m, double sigma2) {
  require_positive(sigma2, "Nakagami sigma2");
  if (!(m >= 0.5) || !std::isfinite(m)) {
    throw std::invalid_argument("Nakagami shape m must be at least 0.5");
  }
  return FadingModel(NakagamiParams{m, sigma2});
}

std::string FadingModel::kind() const {
  return std::visit(Overloaded{[](const RayleighParams&) { return std::string("rayleigh"); },
                               [](const RicianParams&) { return std::string("rician"); },
                               [](const NakagamiParams&) { return std::string("nakagami"); }},
                    params_);
}

std::string FadingModel::describe() const {
  return std::visit(
      Overloaded{
          [](const RayleighParams& p) { return "rayleigh(sigma2=" + format_number(p.sigma2) + ")"; },
          [](const RicianParams& p) {
            return "rician(K=" + format_number(p.k_factor) + ",sigma2=" + format_number(p.sigma2) +
                   ")";
          },
          [](const NakagamiParams& p) {
            return "nakagami(m=" + format_number(p.m) + ",sigma2=" + format_number(p.sigma2) + ")";
          }},
      params_);
}

double FadingModel::cdf(double h) const {
  require_gain(h);
  if (std::isinf(h)) return 1.0;
  return std::visit(Overloaded{[h](const RayleighParams& p) {
                                 return -std::expm1(-h * h / (2.0 * p.sigma2));
                               },
                               [h](const RicianParams& p) {
                                 const double sigma = std::sqrt(p.sigma2);
                                 const double nu = sigma * std::sqrt(2.0 * p.k_factor);
                                 // Upper half through the complement, which stays monotone in the tail.
                                 const double lower = special::marcum_p1(nu / sigma, h / sigma);
                                 if (lower <= 0.5) return lower;
                                 return 1.0 - special::marcum_q1(nu / sigma, h / sigma);
                               },
                               [h](const NakagamiParams& p) {
                                 return special::gamma_p(p.m, p.m * h * h / p.sigma2);
                               }},
                    params_);
}

double FadingModel::pdf(double h) const {
  require_gain(h);
  if (std::isinf(h)) return 0.0;
  return std::visit(
      Overloaded{[h](const RayleighParams& p) {
                   return h / p.sigma2 * std::exp(-h * h / (2.0 * p.sigma2));
                 },
                 [h](const RicianParams& p) {
                   const double nu = std::sqrt(2.0 * p.k_factor * p.sigma2);
                   const double gap = h - nu;
                   // exp(-(h^2 + nu^2) / 2s2) I0(h nu / s2) with the exponent folded
                   // into the scaled Bessel function.
                   return h / p.sigma2 * std::exp(-gap * gap / (2.0 * p.sigma2)) *
                          special::bessel_i0_scaled(h * nu / p.sigma2);
                 },
                 [h](const NakagamiParams& p) {
                   if (h == 0.0) {
                     return p.m == 0.5 ? std::sqrt(2.0 / (std::acos(-1.0) * p.sigma2)) : 0.0;
                   }
                   return std::exp(nakagami_log_pdf(p, h));
                 }},
      params_);
}

double FadingModel::quantile(double p) const {
  if (!(p >= 0.0) || !(p < 1.0)) {
    throw std::domain_error("quantile probability must lie in [0, 1)");
  }
  if (p == 0.0) return 0.0;
  if (const auto* r = std::get_if<RayleighParams>(&params_)) {
    return std::sqrt(-2.0 * r->sigma2 * std::log1p(-p));
  }

  double hi = std::visit(Overloaded{[](const RayleighParams& q) { return std::sqrt(q.sigma2); },
                                    [](const RicianParams& q) {
                                      return std::sqrt(q.sigma2) * (1.0 + std::sqrt(2.0 * q.k_factor));
                                    },
                                    [](const NakagamiParams& q) { return std::sqrt(q.sigma2); }},
                         params_);
  double lo = 0.0;
  while (cdf(hi) <= p) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::domain_error("quantile bracket diverged");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = cdf(mid);
    if (std::abs(f - p) <= 1e-13) return mid;
    if (f < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

double FadingModel::sample(RandomStream& rng) const {
  return std::visit(Overloaded{[&rng](const RayleighParams& p) {
                                 return std::sqrt(-2.0 * p.sigma2 * std::log(rng.uniform_open()));
                               },
                               [&rng](const RicianParams& p) {
                                 const double sigma = std::sqrt(p.sigma2);
                                 const double nu = sigma * std::sqrt(2.0 * p.k_factor);
                                 const double in_phase = nu + sigma * rng.normal();
                                 const double quadrature = sigma * rng.normal();
                                 return std::hypot(in_phase, quadrature);
                               },
                               [&rng](const NakagamiParams& p) {
                                 return std::sqrt(rng.gamma(p.m) * p.sigma2 / p.m);
                               }},
                    params_);
}

}  // namespace fadingfl
