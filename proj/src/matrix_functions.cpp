#include "geowalk/matrix_functions.hpp"

#include <array>
#include <cmath>

#include "geowalk/errors.hpp"

namespace geowalk::linalg {
namespace {

constexpr int kPadeDegree = 8;

std::array<double, kPadeDegree + 1> pade_exp_coefficients() {
  // c_k = (2m - k)! m! / ((2m)! k! (m - k)!), built by the ratio recurrence.
  std::array<double, kPadeDegree + 1> c{};
  c[0] = 1.0;
  for (int k = 0; k < kPadeDegree; ++k) {
    c[k + 1] = c[k] * static_cast<double>(kPadeDegree - k) /
               (static_cast<double>(2 * kPadeDegree - k) * static_cast<double>(k + 1));
  }
  return c;
}

struct GaussLegendre {
  std::array<double, kPadeDegree> nodes{};
  std::array<double, kPadeDegree> weights{};
};

// Nodes and weights on [0, 1].
GaussLegendre gauss_legendre_unit() {
  GaussLegendre gl;
  const int m = kPadeDegree;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    gl.nodes[i] = 0.5 * (1.0 - x);
    gl.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

double one_norm(const Eigen::MatrixXd& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  static const auto coeffs = pade_exp_coefficients();
  const Eigen::Index n = a.rows();
  if (n == 0) return a;

  const double norm = one_norm(a);
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd scaled = a / std::ldexp(1.0, squarings);

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd power = identity;
  Eigen::MatrixXd numer = coeffs[0] * identity;
  Eigen::MatrixXd denom = coeffs[0] * identity;
  for (int k = 1; k <= kPadeDegree; ++k) {
    power = power * scaled;
    numer += coeffs[k] * power;
    denom += ((k % 2 == 0) ? coeffs[k] : -coeffs[k]) * power;
  }
  Eigen::MatrixXd result = denom.partialPivLu().solve(numer);
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd y = a;
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n, n);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::MatrixXd y_inv = y.partialPivLu().inverse();
    const Eigen::MatrixXd z_inv = z.partialPivLu().inverse();
    const Eigen::MatrixXd y_next = 0.5 * (y + z_inv);
    z = 0.5 * (z + y_inv);
    const double change = (y_next - y).norm();
    y = y_next;
    if (change <= 1e-15 * y.norm()) break;
  }
  return y;
}

Eigen::MatrixXd logm(const Eigen::MatrixXd& a) {
  static const auto gl = gauss_legendre_unit();
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);

  Eigen::MatrixXd current = a;
  int roots = 0;
  while ((current - identity).norm() > 0.25) {
    if (roots > 60) throw Error("logm: square-root reduction did not converge");
    current = sqrtm(current);
    ++roots;
  }
  const Eigen::MatrixXd x = current - identity;
  Eigen::MatrixXd result = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < kPadeDegree; ++j) {
    const Eigen::MatrixXd shifted = identity + gl.nodes[j] * x;
    result += gl.weights[j] * shifted.partialPivLu().solve(x);
  }
  return std::ldexp(1.0, roots) * result;
}

Eigen::MatrixXd polar_orthogonal(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace geowalk::linalg
