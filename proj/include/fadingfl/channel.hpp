#pragma once

#include <string>
#include <variant>

#include "fadingfl/random.hpp"

namespace fadingfl {

/// F(h) = 1 - exp(-h^2 / (2 sigma2)). Under this parameterization E[h^2] = 2 sigma2.
struct RayleighParams {
  double sigma2 = 1.0;
  bool operator==(const RayleighParams&) const = default;
};

/// Rice envelope with specular amplitude nu = sigma * sqrt(2 K);
/// F(h) = 1 - Q1(nu / sigma, h / sigma).
struct RicianParams {
  double k_factor = 0.0;  // linear, nu^2 / (2 sigma2)
  double sigma2 = 1.0;
  bool operator==(const RicianParams&) const = default;
};

/// F(h) = P(m, m h^2 / sigma2), P the regularized lower incomplete gamma.
struct NakagamiParams {
  double m = 1.0;
  double sigma2 = 1.0;
  bool operator==(const NakagamiParams&) const = default;
};

/// Channel-gain distribution. Immutable after construction; safe to share
/// across threads. Gains are iid across clients, subchannels and rounds.
class FadingModel {
 public:
  using Params = std::variant<RayleighParams, RicianParams, NakagamiParams>;

  static FadingModel rayleigh(double sigma2 = 1.0);
  static FadingModel rician(double k_factor, double sigma2 = 1.0);
  static FadingModel rician_db(double k_factor_db, double sigma2 = 1.0);
  static FadingModel nakagami(double m, double sigma2 = 1.0);

  const Params& params() const noexcept { return params_; }

  /// "rayleigh", "rician" or "nakagami".
  std::string kind() const;
  /// Kind plus parameters, e.g. "nakagami(m=3,sigma2=1)".
  std::string describe() const;

  /// Throws std::domain_error for h < 0.
  double cdf(double h) const;
  double pdf(double h) const;
  /// Inverse CDF for p in [0, 1). Closed form for Rayleigh, bisection otherwise.
  double quantile(double p) const;
  /// One gain draw, using an exact variant-specific sampler.
  double sample(RandomStream& rng) const;

  bool operator==(const FadingModel&) const = default;

 private:
  explicit FadingModel(Params params) : params_(params) {}
  Params params_;
};

}  // namespace fadingfl
