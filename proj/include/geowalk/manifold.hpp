#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <string_view>

#include "geowalk/rng.hpp"

namespace geowalk {

/// Point on a manifold, stored in its ambient embedding:
/// R^n for Euclidean space, R^{n+1} for the sphere S^n and the row-major
/// flattening of an n x n matrix for SO(n).
struct ManifoldPoint {
  Eigen::VectorXd coords;
};

/// Tangent vector at `base`, expressed in the same ambient embedding.
/// For SO(n) the components are X * Omega with Omega skew-symmetric.
struct TangentVector {
  Eigen::VectorXd base;
  Eigen::VectorXd components;
};

enum class ManifoldKind { Euclidean, Sphere, SpecialOrthogonal };

struct ManifoldDescriptor {
  ManifoldKind kind = ManifoldKind::Euclidean;
  // n of "euclidean:n", "sphere:n", "so:n" (the matrix size for SO(n)).
  int parameter = 1;
  int intrinsic_dim = 1;
  double curvature_bound = 0.0;
  double injectivity_radius = std::numeric_limits<double>::infinity();
};

/// Riemannian manifold with an exponential-map oracle.
///
/// Supported: Euclidean R^n, the unit sphere S^n and SO(n) with the
/// bi-invariant metric <A, B> = tr(A^T B). All operations are pure.
class Manifold {
 public:
  static Manifold euclidean(int n);
  static Manifold sphere(int n);
  /// `curvature_bound` defaults to n; SO(n) has no closed-form value here.
  static Manifold special_orthogonal(int n, double curvature_bound = -1.0,
                                     double injectivity_radius = M_PI);

  /// Parses "euclidean:<n>", "sphere:<n>" or "so:<n>".
  static Manifold parse(std::string_view spec);

  const ManifoldDescriptor& descriptor() const { return desc_; }
  ManifoldKind kind() const { return desc_.kind; }
  int intrinsic_dim() const { return desc_.intrinsic_dim; }
  int ambient_dim() const { return ambient_dim_; }
  std::string name() const;

  /// Number of standard normals consumed by `sample_tangent_gaussian`.
  int gaussians_per_tangent_draw() const;

  ManifoldPoint exp_map(const ManifoldPoint& x, const TangentVector& v) const;
  double distance(const ManifoldPoint& x, const ManifoldPoint& y) const;
  TangentVector sample_tangent_gaussian(const ManifoldPoint& x, RngStream& rng) const;
  ManifoldPoint geodesic_point(const ManifoldPoint& x, const TangentVector& v, double t) const;

  /// Riemannian norm of a tangent vector (Euclidean norm of the ambient
  /// components for all three manifolds under the chosen metrics).
  double norm(const TangentVector& v) const;

  /// Projects an ambient vector onto the tangent space at x.
  TangentVector project_tangent(const ManifoldPoint& x, const Eigen::VectorXd& ambient) const;

  /// Throws unless x satisfies the point invariants (within `tol`).
  void validate_point(const ManifoldPoint& x, double tol = 1e-8) const;
  bool is_valid_point(const ManifoldPoint& x, double tol = 1e-8) const;

  /// Identity / north pole / origin.
  ManifoldPoint reference_point() const;

  /// Riemannian log map, available on the sphere and Euclidean space only.
  TangentVector log_map(const ManifoldPoint& x, const ManifoldPoint& y) const;

 private:
  explicit Manifold(ManifoldDescriptor desc);

  ManifoldDescriptor desc_;
  int ambient_dim_;
};

}  // namespace geowalk
