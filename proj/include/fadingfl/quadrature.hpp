#pragma once

#include <cstddef>
#include <functional>

namespace fadingfl {

struct QuadratureOptions {
  double abs_tolerance = 1e-7;
  std::size_t initial_segments = 16;
  std::size_t max_depth = 40;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [lo, hi]. Intervals are
/// bisected until each error estimate falls below its share of the tolerance.
/// Throws NumericFailure when the depth limit is hit or f returns non-finite.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureOptions& options = {});

}  // namespace fadingfl
