#include "geowalk/instances.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace geowalk {
namespace {

double uniform(RngStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

int uniform_int(RngStream& rng, int lo, int hi) {
  return lo + static_cast<int>(std::floor(rng.uniform() * (hi - lo + 1)));
}

}  // namespace

AffineNeedleInstance random_affine_needle_instance(RngStream& rng, int max_n) {
  AffineNeedleInstance in{};
  in.a = uniform(rng, -5.0, 5.0);
  in.b = in.a + uniform(rng, 0.1, 5.0);
  in.n = uniform_int(rng, 1, max_n);
  const double eps_max = (in.b - in.a) / in.n;
  in.eps = rng.uniform() < 0.25 ? eps_max : eps_max * uniform(rng, 0.05, 1.0);
  in.c1 = uniform(rng, -3.0, 3.0);
  in.c2 = -std::min(in.c1 * in.a, in.c1 * (in.b + in.eps)) + uniform(rng, 0.01, 3.0);
  return in;
}

ConvexFunction1D random_convex_piecewise_linear(RngStream& rng, double a, double b) {
  const int interior = uniform_int(rng, 2, 7);
  std::vector<double> xs{a, b};
  for (int i = 0; i < interior; ++i) xs.push_back(uniform(rng, a, b));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<double> slopes;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) slopes.push_back(2.0 * rng.normal());
  std::sort(slopes.begin(), slopes.end());

  std::vector<double> ys{uniform(rng, -1.0, 1.0)};
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) ys.push_back(ys.back() + slopes[i] * (xs[i + 1] - xs[i]));
  return ConvexFunction1D::piecewise_linear(std::move(xs), std::move(ys));
}

KvNeedleInstance random_kv_needle_instance(RngStream& rng, int max_n) {
  const double a = uniform(rng, 0.0, 3.0);
  const double b = a + uniform(rng, 0.5, 10.0);
  const int n = uniform_int(rng, 1, max_n);
  return {random_convex_piecewise_linear(rng, a, b), a, b, n};
}

PartitionInstance random_partition_instance(RngStream& rng, int max_n) {
  const double lo = uniform(rng, 0.1, 3.0);
  const double hi = lo + uniform(rng, 0.5, 5.0);
  const int n = uniform_int(rng, 1, max_n);
  auto h = random_convex_piecewise_linear(rng, lo, hi);
  const double alpha = uniform(rng, 0.1, 10.0);
  const double beta = uniform(rng, 0.1, 10.0);
  return {std::move(h), lo, hi, n, alpha, beta};
}

}  // namespace geowalk
