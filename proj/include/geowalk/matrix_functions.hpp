#pragma once

#include <Eigen/Dense>

namespace geowalk::linalg {

/// Matrix exponential by scaling and squaring with a degree-8 diagonal
/// Pade approximant. Accurate to roughly 1e-14 relative for the skew and
/// near-orthogonal arguments used here.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// Principal matrix logarithm by inverse scaling and squaring: repeated
/// square roots until ||A - I|| < 0.25, then a Gauss-Legendre evaluation
/// of the diagonal Pade approximant of log(I + X).
///
/// The caller is responsible for rejecting matrices with eigenvalues on
/// the closed negative real axis.
Eigen::MatrixXd logm(const Eigen::MatrixXd& a);

/// Principal square root by the Denman-Beavers iteration.
Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& a);

/// Orthogonal polar factor (nearest orthogonal matrix in Frobenius norm).
Eigen::MatrixXd polar_orthogonal(const Eigen::MatrixXd& a);

}  // namespace geowalk::linalg
