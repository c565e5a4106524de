#pragma once

#include <functional>
#include <vector>

namespace geowalk {

struct QuadratureSpec {
  double abs_tol = 1e-10;
  long max_subdivisions = 1L << 20;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long subdivisions = 0;
};

/// Globally adaptive Gauss-Kronrod (7, 15) quadrature on [a, b]: the
/// interval with the largest error estimate is halved until the summed
/// estimate drops below spec.abs_tol. Points in `breakpoints` inside
/// (a, b) seed the initial partition, so integrands with known kinks are
/// smooth on every panel.
QuadratureResult integrate(const std::function<double(double)>& fn, double a, double b,
                           const QuadratureSpec& spec = {},
                           const std::vector<double>& breakpoints = {});

}  // namespace geowalk
