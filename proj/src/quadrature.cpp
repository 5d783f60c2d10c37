#include "fadingfl/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "fadingfl/error.hpp"

namespace fadingfl {
namespace {

// Kronrod 15-point abscissae; odd indices are the embedded Gauss 7-point nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Estimate {
  double value;
  double error;
};

Estimate gauss_kronrod(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod)) {
    throw NumericFailure("integrand returned a non-finite value");
  }
  return {kronrod, std::abs(kronrod - gauss)};
}

double refine(const std::function<double(double)>& f, double lo, double hi, double tolerance,
              std::size_t depth, const QuadratureOptions& options) {
  const Estimate est = gauss_kronrod(f, lo, hi);
  if (est.error <= tolerance) return est.value;
  if (depth >= options.max_depth) {
    throw NumericFailure("adaptive quadrature did not converge");
  }
  const double mid = 0.5 * (lo + hi);
  return refine(f, lo, mid, 0.5 * tolerance, depth + 1, options) +
         refine(f, mid, hi, 0.5 * tolerance, depth + 1, options);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureOptions& options) {
  if (!(hi >= lo)) throw std::invalid_argument("integration bounds must satisfy lo <= hi");
  if (hi == lo) return 0.0;
  const std::size_t segments = options.initial_segments == 0 ? 1 : options.initial_segments;
  const double width = (hi - lo) / static_cast<double>(segments);
  const double share = options.abs_tolerance / static_cast<double>(segments);
  double total = 0.0;
  for (std::size_t s = 0; s < segments; ++s) {
    const double a = lo + width * static_cast<double>(s);
    const double b = s + 1 == segments ? hi : a + width;
    total += refine(f, a, b, share, 0, options);
  }
  return total;
}

}  // namespace fadingfl
