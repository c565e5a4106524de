#include <doctest.h>

#include <Eigen/Dense>

#include "geowalk/matrix_functions.hpp"
#include "geowalk/rng.hpp"

using namespace geowalk;

namespace {

Eigen::MatrixXd series_exp(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 60; ++k) {
    term = term * a / k;
    sum += term;
  }
  return sum;
}

Eigen::MatrixXd random_skew(int n, double scale, RngStream& rng) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return scale * (a - a.transpose()) / 2.0;
}

}  // namespace

TEST_CASE("expm matches the power series") {
  RngStream rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = random_skew(4, 0.8, rng) + 0.1 * Eigen::MatrixXd::Random(4, 4);
    CHECK((linalg::expm(a) - series_exp(a)).norm() < 1e-12);
  }
}

TEST_CASE("expm of large arguments uses squaring correctly") {
  Eigen::MatrixXd a(2, 2);
  a << 0, -20, 20, 0;
  Eigen::MatrixXd rot(2, 2);
  rot << std::cos(20.0), -std::sin(20.0), std::sin(20.0), std::cos(20.0);
  CHECK((linalg::expm(a) - rot).norm() < 1e-11);
}

TEST_CASE("logm inverts expm on rotations within the principal branch") {
  RngStream rng(5);
  for (int n : {2, 3, 5}) {
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd s = random_skew(n, 1.0, rng);
      // keep the spectral radius below pi
      const double radius = Eigen::EigenSolver<Eigen::MatrixXd>(s).eigenvalues().cwiseAbs().maxCoeff();
      if (radius > 2.8) s *= 2.8 / radius;
      const Eigen::MatrixXd q = linalg::expm(s);
      CHECK((linalg::logm(q) - s).norm() < 1e-10);
    }
  }
}

TEST_CASE("sqrtm squares back") {
  RngStream rng(9);
  const Eigen::MatrixXd q = linalg::expm(random_skew(3, 1.0, rng));
  const Eigen::MatrixXd r = linalg::sqrtm(q);
  CHECK((r * r - q).norm() < 1e-12);
}

TEST_CASE("polar factor is the nearest rotation") {
  RngStream rng(11);
  const Eigen::MatrixXd q = linalg::expm(random_skew(3, 1.0, rng));
  const Eigen::MatrixXd noisy = q + 1e-6 * Eigen::MatrixXd::Random(3, 3);
  const Eigen::MatrixXd p = linalg::polar_orthogonal(noisy);
  CHECK((p.transpose() * p - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
  CHECK((p - q).norm() < 1e-5);
  CHECK(p.determinant() > 0.0);
}
