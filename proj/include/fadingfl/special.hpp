#pragma once

// Special functions backing the fading-channel CDFs.

namespace fadingfl::special {

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
/// Series for x < a + 1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly.
double gamma_q(double a, double x);

/// Modified Bessel function I0(x) scaled by exp(-x), for x >= 0.
double bessel_i0_scaled(double x);

/// 1 - Q1(a, b), the CDF of a noncentral chi distribution with two degrees of
/// freedom. Evaluated as a Poisson(a^2/2) mixture of P(j + 1, b^2/2); each mixture
/// term is a positive quantity so small values keep their relative accuracy.
double marcum_p1(double a, double b);

/// First-order Marcum Q-function Q1(a, b).
double marcum_q1(double a, double b);

}  // namespace fadingfl::special
