// Special functions against Boost.Math as an independent implementation.

#include <doctest.h>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "fadingfl/special.hpp"

namespace sp = fadingfl::special;

TEST_CASE("regularized incomplete gamma matches Boost") {
  double worst = 0.0;
  for (const double a : {0.5, 1.0, 2.0, 3.0, 7.5, 20.0, 150.0}) {
    for (const double x : {0.0, 1e-6, 0.1, 0.5, 1.0, 2.0, 3.0, 10.0, 30.0, 160.0, 400.0}) {
      const double p = sp::gamma_p(a, x);
      const double q = sp::gamma_q(a, x);
      worst = std::max(worst, std::abs(p - boost::math::gamma_p(a, x)));
      worst = std::max(worst, std::abs(q - boost::math::gamma_q(a, x)));
      CHECK(p + q == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("scaled I0 matches Boost") {
  for (const double x : {0.0, 0.3, 1.0, 5.0, 40.0, 300.0}) {
    CHECK(sp::bessel_i0_scaled(x) ==
          doctest::Approx(boost::math::cyl_bessel_i(0, x) * std::exp(-x)).epsilon(1e-13));
  }
  // Above the direct range: compare with the leading asymptotic terms.
  const double x = 2000.0;
  const double approx = 1.0 / std::sqrt(2.0 * M_PI * x) * (1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x));
  CHECK(sp::bessel_i0_scaled(x) == doctest::Approx(approx).epsilon(1e-9));
}

TEST_CASE("Marcum Q1 matches the noncentral chi-square CDF") {
  // 1 - Q1(a, b) = P(X <= b^2) for X noncentral chi-square, 2 dof, lambda = a^2.
  double worst = 0.0;
  for (const double a : {0.0, 0.1, 1.0, 3.0, 5.634, 10.0, 25.0}) {
    const boost::math::non_central_chi_squared dist(2.0, a * a);
    for (const double b : {0.0, 0.01, 0.5, 1.0, 3.0, 5.0, 6.0, 9.0, 12.0, 30.0}) {
      const double ref = boost::math::cdf(dist, b * b);
      worst = std::max(worst, std::abs(sp::marcum_p1(a, b) - ref));
      worst = std::max(worst, std::abs(sp::marcum_q1(a, b) - (1.0 - ref)));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("Marcum Q1 edge values") {
  CHECK(sp::marcum_q1(0.0, 0.0) == 1.0);
  CHECK(sp::marcum_q1(2.0, 0.0) == 1.0);
  // a = 0 reduces to the Rayleigh tail exp(-b^2 / 2).
  CHECK(sp::marcum_q1(0.0, 1.7) == doctest::Approx(std::exp(-1.7 * 1.7 / 2.0)).epsilon(1e-14));
}
