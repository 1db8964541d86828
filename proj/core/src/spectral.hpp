#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace windcast::detail {

// Minimum-norm solve of the symmetric system M U = B; eigenvalues with
// magnitude below rel_tol * max|eigenvalue| are truncated.
inline Eigen::MatrixXd pinv_solve_sym(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const auto& vals = eig.eigenvalues();
  const double cutoff = rel_tol * std::max(vals.cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (std::abs(vals[i]) > cutoff) inv[i] = 1.0 / vals[i];
  return eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * b));
}

// Symmetric inverse square root with the same truncation rule; M must be PSD
// up to rounding (negative eigenvalues beyond the cutoff are dropped).
inline Eigen::MatrixXd inv_sqrt_sym(const Eigen::MatrixXd& m, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const auto& vals = eig.eigenvalues();
  const double cutoff = rel_tol * std::max(vals.cwiseAbs().maxCoeff(), 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals[i] > cutoff) inv[i] = 1.0 / std::sqrt(vals[i]);
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace windcast::detail
