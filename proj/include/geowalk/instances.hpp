#pragma once

#include "geowalk/diagnostics.hpp"
#include "geowalk/rng.hpp"

namespace geowalk {

/// Random inputs satisfying each needle inequality's hypotheses.

struct AffineNeedleInstance {
  double a, b, c1, c2;
  int n;
  double eps;
};

/// n in [1, max_n], eps in (0, (b - a)/n] (exactly the upper end one time
/// in four), c1 x + c2 > 0 on [a, b + eps].
AffineNeedleInstance random_affine_needle_instance(RngStream& rng, int max_n = 20);

/// Convex piecewise-linear function on [a, b] with 2 to 7 random kinks.
ConvexFunction1D random_convex_piecewise_linear(RngStream& rng, double a, double b);

struct KvNeedleInstance {
  ConvexFunction1D h;
  double a, b;
  int n;
};

KvNeedleInstance random_kv_needle_instance(RngStream& rng, int max_n = 15);

struct PartitionInstance {
  ConvexFunction1D h;
  double lo, hi;
  int n;
  double alpha, beta;
};

/// (alpha, beta) uniform on [0.1, 10]^2.
PartitionInstance random_partition_instance(RngStream& rng, int max_n = 10);

}  // namespace geowalk
