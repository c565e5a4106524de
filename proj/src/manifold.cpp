#include "geowalk/manifold.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <string>

#include "geowalk/errors.hpp"
#include "geowalk/matrix_functions.hpp"

namespace geowalk {
namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd as_matrix(const Eigen::VectorXd& coords, int n) {
  return Eigen::Map<const RowMajorMatrix>(coords.data(), n, n);
}

Eigen::VectorXd as_coords(const Eigen::MatrixXd& m) {
  const RowMajorMatrix row_major = m;
  return Eigen::Map<const Eigen::VectorXd>(row_major.data(), row_major.size());
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Eigenvalue of Q^T Q' at -1: the rotation is on the cut locus.
void check_not_cut_locus(const Eigen::MatrixXd& relative) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(relative, false);
  for (const auto& lambda : solver.eigenvalues()) {
    if (std::abs(lambda + std::complex<double>(1.0, 0.0)) < 1e-6) {
      throw CutLocus("relative rotation has an eigenvalue at -1");
    }
  }
}

int parse_positive_int(std::string_view text, std::string_view field) {
  int value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value < 1) {
    throw InvalidParams("manifold: " + std::string(field) + " must be a positive integer, got '" +
                        std::string(text) + "'");
  }
  return value;
}

}  // namespace

Manifold::Manifold(ManifoldDescriptor desc) : desc_(desc) {
  switch (desc_.kind) {
    case ManifoldKind::Euclidean:
      ambient_dim_ = desc_.parameter;
      break;
    case ManifoldKind::Sphere:
      ambient_dim_ = desc_.parameter + 1;
      break;
    case ManifoldKind::SpecialOrthogonal:
      ambient_dim_ = desc_.parameter * desc_.parameter;
      break;
  }
}

Manifold Manifold::euclidean(int n) {
  if (n < 1) throw InvalidParams("manifold: euclidean dimension must be >= 1");
  return Manifold(ManifoldDescriptor{ManifoldKind::Euclidean, n, n, 0.0,
                                     std::numeric_limits<double>::infinity()});
}

Manifold Manifold::sphere(int n) {
  if (n < 1) throw InvalidParams("manifold: sphere dimension must be >= 1");
  // Sectional curvature 1; R = n is the declared Frobenius-type bound.
  return Manifold(ManifoldDescriptor{ManifoldKind::Sphere, n, n, static_cast<double>(n), M_PI});
}

Manifold Manifold::special_orthogonal(int n, double curvature_bound, double injectivity_radius) {
  if (n < 2) throw InvalidParams("manifold: so(n) requires n >= 2");
  if (!(injectivity_radius > 0.0)) throw InvalidParams("manifold: injectivity radius must be > 0");
  const double bound = curvature_bound < 0.0 ? static_cast<double>(n) : curvature_bound;
  return Manifold(ManifoldDescriptor{ManifoldKind::SpecialOrthogonal, n, n * (n - 1) / 2, bound,
                                     injectivity_radius});
}

Manifold Manifold::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidParams("manifold: expected '<kind>:<n>', got '" + std::string(spec) + "'");
  }
  const auto kind = spec.substr(0, colon);
  const auto arg = spec.substr(colon + 1);
  if (kind == "euclidean") return euclidean(parse_positive_int(arg, "euclidean dimension"));
  if (kind == "sphere") return sphere(parse_positive_int(arg, "sphere dimension"));
  if (kind == "so") {
    const int n = parse_positive_int(arg, "so matrix size");
    if (n < 2) throw InvalidParams("manifold: so matrix size must be >= 2");
    return special_orthogonal(n);
  }
  throw InvalidParams("manifold: unknown kind '" + std::string(kind) + "'");
}

std::string Manifold::name() const {
  switch (desc_.kind) {
    case ManifoldKind::Euclidean:
      return "euclidean:" + std::to_string(desc_.parameter);
    case ManifoldKind::Sphere:
      return "sphere:" + std::to_string(desc_.parameter);
    case ManifoldKind::SpecialOrthogonal:
      return "so:" + std::to_string(desc_.parameter);
  }
  return {};
}

int Manifold::gaussians_per_tangent_draw() const {
  switch (desc_.kind) {
    case ManifoldKind::Euclidean:
      return desc_.parameter;
    case ManifoldKind::Sphere:
      return desc_.parameter + 1;
    case ManifoldKind::SpecialOrthogonal:
      return desc_.intrinsic_dim;
  }
  return 0;
}

bool Manifold::is_valid_point(const ManifoldPoint& x, double tol) const {
  if (x.coords.size() != ambient_dim_ || !all_finite(x.coords)) return false;
  switch (desc_.kind) {
    case ManifoldKind::Euclidean:
      return true;
    case ManifoldKind::Sphere:
      return std::abs(x.coords.norm() - 1.0) <= tol;
    case ManifoldKind::SpecialOrthogonal: {
      const int n = desc_.parameter;
      const Eigen::MatrixXd q = as_matrix(x.coords, n);
      const double drift = (q.transpose() * q - Eigen::MatrixXd::Identity(n, n)).norm();
      return drift <= tol && q.determinant() > 0.0;
    }
  }
  return false;
}

void Manifold::validate_point(const ManifoldPoint& x, double tol) const {
  if (x.coords.size() != ambient_dim_) {
    throw DimensionMismatch("point has " + std::to_string(x.coords.size()) +
                            " coordinates, expected " + std::to_string(ambient_dim_) + " for " +
                            name());
  }
  if (!all_finite(x.coords)) throw NonFiniteInput("point has non-finite coordinates");
  if (!is_valid_point(x, tol)) throw InvalidParams("point violates the invariants of " + name());
}

ManifoldPoint Manifold::reference_point() const {
  Eigen::VectorXd coords = Eigen::VectorXd::Zero(ambient_dim_);
  switch (desc_.kind) {
    case ManifoldKind::Euclidean:
      break;
    case ManifoldKind::Sphere:
      coords[ambient_dim_ - 1] = 1.0;
      break;
    case ManifoldKind::SpecialOrthogonal:
      coords = as_coords(Eigen::MatrixXd::Identity(desc_.parameter, desc_.parameter));
      break;
  }
  return {coords};
}

ManifoldPoint Manifold::exp_map(const ManifoldPoint& x, const TangentVector& v) const {
  if (x.coords.size() != ambient_dim_ || v.components.size() != ambient_dim_ ||
      v.base.size() != ambient_dim_) {
    throw DimensionMismatch("exp_map: dimension mismatch for " + name());
  }
  if (!all_finite(x.coords) || !all_finite(v.components)) {
    throw NonFiniteInput("exp_map: non-finite input");
  }
  if ((v.base - x.coords).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidParams("exp_map: tangent vector is based at a different point");
  }

  switch (desc_.kind) {
    case ManifoldKind::Euclidean:
      return {x.coords + v.components};
    case ManifoldKind::Sphere: {
      const double length = v.components.norm();
      if (length == 0.0) return x;
      Eigen::VectorXd y = std::cos(length) * x.coords + (std::sin(length) / length) * v.components;
      y /= y.norm();
      return {y};
    }
    case ManifoldKind::SpecialOrthogonal: {
      const int n = desc_.parameter;
      if (v.components.isZero(0.0)) return x;
      const Eigen::MatrixXd q = as_matrix(x.coords, n);
      const Eigen::MatrixXd omega = q.transpose() * as_matrix(v.components, n);
      const Eigen::MatrixXd moved = q * linalg::expm(omega);
      return {as_coords(linalg::polar_orthogonal(moved))};
    }
  }
  return x;
}

double Manifold::distance(const ManifoldPoint& x, const ManifoldPoint& y) const {
  if (x.coords.size() != ambient_dim_ || y.coords.size() != ambient_dim_) {
    throw DimensionMismatch("distance: dimension mismatch for " + name());
  }
  switch (desc_.kind) {
    case ManifoldKind::Euclidean:
      return (x.coords - y.coords).norm();
    case ManifoldKind::Sphere: {
      // atan2 form of arccos(<x, y>), accurate near 0 and pi.
      const double cosine = std::clamp(x.coords.dot(y.coords), -1.0, 1.0);
      const double sine = (y.coords - x.coords.dot(y.coords) * x.coords).norm();
      return std::atan2(sine, cosine);
    }
    case ManifoldKind::SpecialOrthogonal: {
      const int n = desc_.parameter;
      const Eigen::MatrixXd relative = as_matrix(x.coords, n).transpose() * as_matrix(y.coords, n);
      if ((relative - Eigen::MatrixXd::Identity(n, n)).norm() == 0.0) return 0.0;
      check_not_cut_locus(relative);
      const Eigen::MatrixXd log = linalg::logm(relative);
      // The principal log of an orthogonal matrix is skew; drop round-off.
      return (0.5 * (log - log.transpose())).norm();
    }
  }
  return 0.0;
}

TangentVector Manifold::log_map(const ManifoldPoint& x, const ManifoldPoint& y) const {
  switch (desc_.kind) {
    case ManifoldKind::Euclidean:
      return {x.coords, y.coords - x.coords};
    case ManifoldKind::Sphere: {
      Eigen::VectorXd w = y.coords - x.coords.dot(y.coords) * x.coords;
      const double w_norm = w.norm();
      const double d = distance(x, y);
      if (d == 0.0) return {x.coords, Eigen::VectorXd::Zero(ambient_dim_)};
      if (w_norm < 1e-14) throw CutLocus("log_map: antipodal points");
      return {x.coords, (d / w_norm) * w};
    }
    case ManifoldKind::SpecialOrthogonal: {
      const int n = desc_.parameter;
      const Eigen::MatrixXd q = as_matrix(x.coords, n);
      const Eigen::MatrixXd relative = q.transpose() * as_matrix(y.coords, n);
      check_not_cut_locus(relative);
      Eigen::MatrixXd log = linalg::logm(relative);
      log = 0.5 * (log - log.transpose());
      return {x.coords, as_coords(q * log)};
    }
  }
  return {};
}

TangentVector Manifold::project_tangent(const ManifoldPoint& x, const Eigen::VectorXd& ambient) const {
  switch (desc_.kind) {
    case ManifoldKind::Euclidean:
      return {x.coords, ambient};
    case ManifoldKind::Sphere:
      return {x.coords, ambient - x.coords.dot(ambient) * x.coords};
    case ManifoldKind::SpecialOrthogonal: {
      const int n = desc_.parameter;
      const Eigen::MatrixXd q = as_matrix(x.coords, n);
      const Eigen::MatrixXd a = q.transpose() * as_matrix(ambient, n);
      return {x.coords, as_coords(q * (0.5 * (a - a.transpose())))};
    }
  }
  return {};
}

TangentVector Manifold::sample_tangent_gaussian(const ManifoldPoint& x, RngStream& rng) const {
  switch (desc_.kind) {
    case ManifoldKind::Euclidean: {
      Eigen::VectorXd u(ambient_dim_);
      for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
      return {x.coords, u};
    }
    case ManifoldKind::Sphere: {
      // Projecting an ambient standard normal onto x^perp gives a standard
      // normal on the tangent space.
      Eigen::VectorXd g(ambient_dim_);
      for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
      g -= x.coords.dot(g) * x.coords;
      return {x.coords, g};
    }
    case ManifoldKind::SpecialOrthogonal: {
      // Coefficients in the orthonormal skew basis (E_ij - E_ji) / sqrt(2).
      const int n = desc_.parameter;
      Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const double z = rng.normal() * M_SQRT1_2;
          omega(i, j) = z;
          omega(j, i) = -z;
        }
      }
      return {x.coords, as_coords(as_matrix(x.coords, n) * omega)};
    }
  }
  return {};
}

ManifoldPoint Manifold::geodesic_point(const ManifoldPoint& x, const TangentVector& v, double t) const {
  return exp_map(x, TangentVector{v.base, t * v.components});
}

double Manifold::norm(const TangentVector& v) const { return v.components.norm(); }

}  // namespace geowalk
