#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include "geowalk/manifold.hpp"
#include "geowalk/rng.hpp"

namespace geowalk {

enum class BodyKind { SphericalCap, GeodesicBall, EuclideanBox, Custom };

/// Inner ball and diameter the sampler's step-size rules depend on.
struct BodyMetadata {
  ManifoldPoint inner_center;
  double inner_radius = 0.0;
  double diameter = 0.0;
};

/// Geodesically convex subset of a manifold, presented by a membership
/// oracle together with a declared inner ball and diameter.
///
/// Built-in kinds know their geometry exactly. Custom bodies are trusted:
/// only `membership(inner_center)` and D >= 2r are checked on construction;
/// `spot_check` offers a probabilistic consistency test.
class ConvexBody {
 public:
  using Membership = std::function<bool(const ManifoldPoint&)>;

  /// Cap {x : <x, axis> >= cos(theta)} on a sphere. theta must lie in
  /// (0, pi/2]; pi/2 is the closed hemisphere, which is only weakly convex.
  static ConvexBody spherical_cap(const Manifold& m, const ManifoldPoint& axis, double theta);
  /// Closed geodesic ball; rho must be below half the injectivity radius.
  static ConvexBody geodesic_ball(const Manifold& m, const ManifoldPoint& center, double rho);
  static ConvexBody euclidean_box(const Manifold& m, const Eigen::VectorXd& lo,
                                  const Eigen::VectorXd& hi);
  static ConvexBody custom(const Manifold& m, Membership membership, const ManifoldPoint& center,
                           double inner_radius, double diameter);

  /// Parses "cap:<axis>:<theta>", "ball:<center>:<rho>" or "box:<lo>:<hi>".
  static ConvexBody parse(const Manifold& m, std::string_view spec);

  const Manifold& manifold() const { return manifold_; }
  BodyKind kind() const { return kind_; }
  bool strongly_convex() const { return strongly_convex_; }

  /// Throws ManifoldMismatch for points of the wrong embedding dimension.
  /// GeodesicBall on SO(n) may throw CutLocus from the distance oracle.
  bool contains(const ManifoldPoint& x) const;

  const BodyMetadata& metadata() const { return meta_; }

  /// Whether `rejection_sample_uniform` is available (built-ins on S^n, R^n).
  bool supports_rejection_sampling() const;

  /// Exact uniform sample with respect to the Riemannian volume: global
  /// uniform proposal plus membership rejection. Throws AcceptanceTooLow
  /// after 10^6 consecutive rejections.
  ManifoldPoint rejection_sample_uniform(RngStream& rng) const;

  /// Cap parameters (valid for kind() == SphericalCap).
  const ManifoldPoint& cap_axis() const { return meta_.inner_center; }
  double cap_angle() const { return angle_; }
  /// Box bounds (valid for kind() == EuclideanBox).
  const Eigen::VectorXd& box_lo() const { return lo_; }
  const Eigen::VectorXd& box_hi() const { return hi_; }

 private:
  ConvexBody(Manifold m, BodyKind kind) : manifold_(std::move(m)), kind_(kind) {}

  Manifold manifold_;
  BodyKind kind_;
  BodyMetadata meta_;
  Membership membership_;
  bool strongly_convex_ = true;
  double angle_ = 0.0;  // cap angle or ball radius
  double cos_angle_ = 0.0;
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
};

/// Result of a probabilistic check of a body's declared metadata.
struct MetadataSpotCheck {
  long ball_points = 0;
  long ball_violations = 0;  // points of B(center, 0.999 r) reported outside
  long pairs = 0;
  long diameter_violations = 0;  // member pairs farther apart than D + 1e-9
  bool ok() const { return ball_violations == 0 && diameter_violations == 0; }
};

/// Samples points of the inner ball B(center, 0.999 r) and, when the body
/// supports rejection sampling, member pairs for the diameter bound.
MetadataSpotCheck spot_check(const ConvexBody& body, RngStream& rng, long ball_points = 10000,
                             long pairs = 10000);

/// Parses a point: comma-separated ambient coordinates, or one of
/// "north" (sphere), "identity" (SO(n)), "origin" (Euclidean), "e<k>".
/// Sphere coordinates are normalized.
ManifoldPoint parse_point(const Manifold& m, std::string_view spec);

/// int_0^angle sin^k(t) dt, by the closed-form reduction recurrence.
double sine_power_integral(int k, double angle);

/// Fraction of the volume of S^n inside a cap of angular radius theta.
double cap_volume_fraction(int n, double theta);

/// CDF of the polar angle of a uniform point in a cap of S^n.
double cap_polar_angle_cdf(int n, double theta, double angle);

}  // namespace geowalk
