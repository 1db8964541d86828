#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace windcast {

struct KernelSpec {
  double gamma = 1.0;
  void validate() const;
};

/// Gaussian Gram matrix: entry (i,j) = exp(-gamma * |a_i - b_j|^2).
Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelSpec& spec);

/// Kernel expansion h(x) = sum_j alpha_j k(anchor_j, x). Exact KRR stores all
/// n training points as anchors; the Nystrom fit stores the p sampled ones.
struct NystromKrrModel {
  Eigen::MatrixXd anchors;  // p x d
  Eigen::VectorXd alpha;
  KernelSpec spec;
  double lambda = 0.0;
  std::vector<std::ptrdiff_t> anchor_indices;
  std::uint64_t seed = 0;
};

/// alpha = (K + n*lambda*I)^-1 y.
NystromKrrModel krr_fit_exact(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const KernelSpec& spec, double lambda);

/// Uniform-without-replacement anchor sample from the given seed, then
/// alpha~ = (Knp' Knp + lambda*n*Kpp)^+ Knp' y with the pseudo-inverse taken
/// by symmetric eigendecomposition (eigenvalues < 1e-10 * max truncated).
NystromKrrModel nystrom_krr_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const KernelSpec& spec, double lambda,
                                std::ptrdiff_t p, std::uint64_t seed);

/// Matrix right-hand side: one model per column of y, sharing the anchor sample.
std::vector<NystromKrrModel> nystrom_krr_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                             const KernelSpec& spec, double lambda,
                                             std::ptrdiff_t p, std::uint64_t seed);

/// The Nystrom normal-equation solve from precomputed blocks:
/// (c + lambda*n*kpp)^+ b with c = Knp'Knp and b = Knp'y. Exposed so grid
/// searches can reuse the Gram blocks across lambda values.
Eigen::MatrixXd nystrom_krr_solve(const Eigen::MatrixXd& c, const Eigen::MatrixXd& kpp,
                                  const Eigen::MatrixXd& b, double lambda, std::ptrdiff_t n);

Eigen::VectorXd krr_predict(const NystromKrrModel& model, const Eigen::MatrixXd& x_query);

}  // namespace windcast
