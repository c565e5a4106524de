#include "geowalk/convex_body.hpp"

#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "geowalk/errors.hpp"

namespace geowalk {
namespace {

constexpr long kMaxConsecutiveRejections = 1'000'000;

double parse_real(std::string_view text, std::string_view field) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw InvalidParams(std::string(field) + ": expected a real number, got '" + std::string(text) +
                        "'");
  }
  return value;
}

std::vector<double> parse_real_list(std::string_view text, std::string_view field) {
  std::vector<double> values;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto token = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    values.push_back(parse_real(token, field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

std::vector<std::string_view> split_colon(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon == std::string_view::npos ? spec.npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  return parts;
}

Eigen::VectorXd broadcast(const std::vector<double>& values, int dim, std::string_view field) {
  if (values.size() == 1) return Eigen::VectorXd::Constant(dim, values[0]);
  if (static_cast<int>(values.size()) != dim) {
    throw InvalidParams(std::string(field) + ": expected 1 or " + std::to_string(dim) +
                        " values, got " + std::to_string(values.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), dim);
}

void check_embedding(const Manifold& m, const ManifoldPoint& x) {
  if (x.coords.size() != m.ambient_dim()) {
    throw ManifoldMismatch("point with " + std::to_string(x.coords.size()) +
                           " coordinates queried against a body on " + m.name());
  }
}

ManifoldPoint haar_rotation(int n, RngStream& rng) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (q.determinant() < 0.0) q.col(0) = -q.col(0);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = q;
  return {Eigen::Map<const Eigen::VectorXd>(row_major.data(), n * n)};
}

}  // namespace

double sine_power_integral(int k, double angle) {
  if (k == 0) return angle;
  if (k == 1) return 1.0 - std::cos(angle);
  const double s = std::sin(angle);
  return -std::pow(s, k - 1) * std::cos(angle) / k +
         (static_cast<double>(k - 1) / k) * sine_power_integral(k - 2, angle);
}

double cap_volume_fraction(int n, double theta) {
  return sine_power_integral(n - 1, theta) / sine_power_integral(n - 1, M_PI);
}

double cap_polar_angle_cdf(int n, double theta, double angle) {
  if (angle <= 0.0) return 0.0;
  if (angle >= theta) return 1.0;
  return sine_power_integral(n - 1, angle) / sine_power_integral(n - 1, theta);
}

ConvexBody ConvexBody::spherical_cap(const Manifold& m, const ManifoldPoint& axis, double theta) {
  if (m.kind() != ManifoldKind::Sphere) throw ManifoldMismatch("spherical cap requires a sphere");
  m.validate_point(axis, 1e-9);
  if (!(theta > 0.0 && theta <= M_PI_2)) {
    throw InvalidParams("cap: angle must lie in (0, pi/2], got " + std::to_string(theta));
  }
  ConvexBody body(m, BodyKind::SphericalCap);
  body.angle_ = theta;
  body.cos_angle_ = std::cos(theta);
  body.strongly_convex_ = theta < M_PI_2;
  body.meta_ = {axis, theta, 2.0 * theta};
  return body;
}

ConvexBody ConvexBody::geodesic_ball(const Manifold& m, const ManifoldPoint& center, double rho) {
  m.validate_point(center, 1e-8);
  const double limit = 0.5 * m.descriptor().injectivity_radius;
  if (!(rho > 0.0 && rho < limit)) {
    throw InvalidParams("ball: radius must lie in (0, " + std::to_string(limit) + "), got " +
                        std::to_string(rho));
  }
  ConvexBody body(m, BodyKind::GeodesicBall);
  body.angle_ = rho;
  body.cos_angle_ = std::cos(rho);
  body.meta_ = {center, rho, 2.0 * rho};
  return body;
}

ConvexBody ConvexBody::euclidean_box(const Manifold& m, const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi) {
  if (m.kind() != ManifoldKind::Euclidean) throw ManifoldMismatch("box requires euclidean space");
  if (lo.size() != m.ambient_dim() || hi.size() != m.ambient_dim()) {
    throw DimensionMismatch("box: bounds must have " + std::to_string(m.ambient_dim()) +
                            " entries");
  }
  if (!((hi - lo).array() > 0.0).all()) throw InvalidParams("box: require lo < hi componentwise");
  ConvexBody body(m, BodyKind::EuclideanBox);
  body.lo_ = lo;
  body.hi_ = hi;
  body.meta_ = {{0.5 * (lo + hi)}, 0.5 * (hi - lo).minCoeff(), (hi - lo).norm()};
  return body;
}

ConvexBody ConvexBody::custom(const Manifold& m, Membership membership, const ManifoldPoint& center,
                              double inner_radius, double diameter) {
  m.validate_point(center, 1e-8);
  if (!(inner_radius > 0.0)) throw InvalidParams("custom body: inner radius must be > 0");
  if (!(diameter >= 2.0 * inner_radius)) throw InvalidParams("custom body: require D >= 2r");
  if (!membership || !membership(center)) {
    throw InvalidParams("custom body: inner center is not a member");
  }
  ConvexBody body(m, BodyKind::Custom);
  body.membership_ = std::move(membership);
  body.meta_ = {center, inner_radius, diameter};
  return body;
}

ConvexBody ConvexBody::parse(const Manifold& m, std::string_view spec) {
  const auto parts = split_colon(spec);
  const auto kind = parts.front();
  if (parts.size() != 3) {
    throw InvalidParams("body: expected '<kind>:<arg>:<arg>', got '" + std::string(spec) + "'");
  }
  if (kind == "cap") {
    return spherical_cap(m, parse_point(m, parts[1]), parse_real(parts[2], "cap angle"));
  }
  if (kind == "ball") {
    return geodesic_ball(m, parse_point(m, parts[1]), parse_real(parts[2], "ball radius"));
  }
  if (kind == "box") {
    if (m.kind() != ManifoldKind::Euclidean) throw InvalidParams("box: requires euclidean space");
    return euclidean_box(m, broadcast(parse_real_list(parts[1], "box lo"), m.ambient_dim(), "box lo"),
                         broadcast(parse_real_list(parts[2], "box hi"), m.ambient_dim(), "box hi"));
  }
  throw InvalidParams("body: unknown kind '" + std::string(kind) + "'");
}

bool ConvexBody::contains(const ManifoldPoint& x) const {
  check_embedding(manifold_, x);
  switch (kind_) {
    case BodyKind::SphericalCap:
      return x.coords.dot(meta_.inner_center.coords) >= cos_angle_;
    case BodyKind::GeodesicBall: {
      if (manifold_.kind() == ManifoldKind::SpecialOrthogonal) {
        // Chord c = |X - Y|_F brackets the distance: c <= d <= (pi/2) c.
        const double chord = (x.coords - meta_.inner_center.coords).norm();
        if (chord > angle_) return false;
        if (M_PI_2 * chord <= angle_) return true;
      }
      return manifold_.distance(meta_.inner_center, x) <= angle_;
    }
    case BodyKind::EuclideanBox:
      return (x.coords.array() >= lo_.array()).all() && (x.coords.array() <= hi_.array()).all();
    case BodyKind::Custom:
      return membership_(x);
  }
  return false;
}

bool ConvexBody::supports_rejection_sampling() const {
  switch (kind_) {
    case BodyKind::SphericalCap:
    case BodyKind::EuclideanBox:
      return true;
    case BodyKind::GeodesicBall:
      return true;
    case BodyKind::Custom:
      return false;
  }
  return false;
}

ManifoldPoint ConvexBody::rejection_sample_uniform(RngStream& rng) const {
  if (!supports_rejection_sampling()) {
    throw Unsupported("rejection sampling is not available for custom bodies");
  }
  const int dim = manifold_.ambient_dim();
  if (kind_ == BodyKind::EuclideanBox) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = lo_[i] + (hi_[i] - lo_[i]) * rng.uniform();
    return {x};
  }
  for (long attempt = 0; attempt < kMaxConsecutiveRejections; ++attempt) {
    ManifoldPoint proposal;
    switch (manifold_.kind()) {
      case ManifoldKind::Sphere: {
        Eigen::VectorXd g(dim);
        for (int i = 0; i < dim; ++i) g[i] = rng.normal();
        proposal.coords = g / g.norm();
        break;
      }
      case ManifoldKind::Euclidean: {
        // Bounding box of the Euclidean ball.
        Eigen::VectorXd x(dim);
        for (int i = 0; i < dim; ++i) {
          x[i] = meta_.inner_center.coords[i] + angle_ * (2.0 * rng.uniform() - 1.0);
        }
        proposal.coords = x;
        break;
      }
      case ManifoldKind::SpecialOrthogonal:
        proposal = haar_rotation(manifold_.descriptor().parameter, rng);
        break;
    }
    bool inside = false;
    try {
      inside = contains(proposal);
    } catch (const CutLocus&) {
      inside = false;
    }
    if (inside) return proposal;
  }
  throw AcceptanceTooLow("rejection sampler: " + std::to_string(kMaxConsecutiveRejections) +
                         " consecutive rejections");
}

MetadataSpotCheck spot_check(const ConvexBody& body, RngStream& rng, long ball_points, long pairs) {
  const Manifold& m = body.manifold();
  const auto& meta = body.metadata();
  const double n = m.intrinsic_dim();
  MetadataSpotCheck result;
  for (long i = 0; i < ball_points; ++i) {
    TangentVector u = m.sample_tangent_gaussian(meta.inner_center, rng);
    const double length = m.norm(u);
    if (length == 0.0) continue;
    const double radius = 0.999 * meta.inner_radius * std::pow(rng.uniform(), 1.0 / n);
    u.components *= radius / length;
    ++result.ball_points;
    if (!body.contains(m.exp_map(meta.inner_center, u))) ++result.ball_violations;
  }
  if (body.supports_rejection_sampling()) {
    for (long i = 0; i < pairs; ++i) {
      const auto x = body.rejection_sample_uniform(rng);
      const auto y = body.rejection_sample_uniform(rng);
      ++result.pairs;
      if (m.distance(x, y) > meta.diameter + 1e-9) ++result.diameter_violations;
    }
  }
  return result;
}

ManifoldPoint parse_point(const Manifold& m, std::string_view spec) {
  const int dim = m.ambient_dim();
  ManifoldPoint p;
  if (spec == "north") {
    if (m.kind() != ManifoldKind::Sphere) throw InvalidParams("point 'north' requires a sphere");
    p = m.reference_point();
  } else if (spec == "identity") {
    if (m.kind() != ManifoldKind::SpecialOrthogonal) {
      throw InvalidParams("point 'identity' requires so:<n>");
    }
    p = m.reference_point();
  } else if (spec == "origin") {
    if (m.kind() != ManifoldKind::Euclidean) throw InvalidParams("point 'origin' requires euclidean");
    p = m.reference_point();
  } else if (!spec.empty() && spec.front() == 'e' && spec.find(',') == std::string_view::npos) {
    int index = -1;
    const auto* last = spec.data() + spec.size();
    const auto [ptr, ec] = std::from_chars(spec.data() + 1, last, index);
    if (ec != std::errc() || ptr != last || index < 0 || index >= dim) {
      throw InvalidParams("point: bad basis-vector spec '" + std::string(spec) + "'");
    }
    p.coords = Eigen::VectorXd::Unit(dim, index);
  } else {
    const auto values = parse_real_list(spec, "point");
    if (static_cast<int>(values.size()) != dim) {
      throw InvalidParams("point: expected " + std::to_string(dim) + " coordinates for " + m.name() +
                          ", got " + std::to_string(values.size()));
    }
    p.coords = Eigen::Map<const Eigen::VectorXd>(values.data(), dim);
    if (m.kind() == ManifoldKind::Sphere) {
      const double norm = p.coords.norm();
      if (norm == 0.0) throw InvalidParams("point: zero vector on a sphere");
      p.coords /= norm;
    }
  }
  m.validate_point(p, 1e-8);
  return p;
}

}  // namespace geowalk
