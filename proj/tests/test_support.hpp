#pragma once

#include <cmath>
#include <functional>

#include "geowalk/manifold.hpp"

namespace testing {

// Composite Simpson rule, used as an oracle independent of the adaptive integrator.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

inline geowalk::ManifoldPoint point(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return {v};
}

inline geowalk::ManifoldPoint north(int n) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1);
  v[n] = 1.0;
  return {v};
}

// Angle from the last coordinate axis.
inline double polar_angle(const geowalk::ManifoldPoint& x) {
  const auto& c = x.coords;
  const double z = c[c.size() - 1];
  return std::atan2(c.head(c.size() - 1).norm(), z);
}

}  // namespace testing
