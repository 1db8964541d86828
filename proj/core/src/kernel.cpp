#include "windcast/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "spectral.hpp"
#include "windcast/random.hpp"

namespace windcast {

namespace {
constexpr double kEigTol = 1e-10;
}

void KernelSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("KernelSpec: gamma must be finite and positive");
}

Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelSpec& spec) {
  spec.validate();
  if (a.cols() != b.cols()) throw std::invalid_argument("gaussian_gram: feature dimensions differ");
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd bn = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * a) * b.transpose();
  d.colwise() += an;
  d.rowwise() += bn.transpose();
  // rounding can push |x-x'|^2 slightly negative
  return (d.cwiseMax(0.0) * -spec.gamma).array().exp();
}

NystromKrrModel krr_fit_exact(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const KernelSpec& spec, double lambda) {
  if (x.rows() != y.size() || x.rows() < 1) throw std::invalid_argument("krr_fit_exact: shape mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("krr_fit_exact: lambda must be positive");
  if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("krr_fit_exact: non-finite inputs");

  const auto n = x.rows();
  Eigen::MatrixXd k = gaussian_gram(x, x, spec);
  k.diagonal().array() += static_cast<double>(n) * lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw std::runtime_error("krr_fit_exact: factorization failed");

  NystromKrrModel model;
  model.anchors = x;
  model.alpha = llt.solve(y);
  model.spec = spec;
  model.lambda = lambda;
  model.anchor_indices.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) model.anchor_indices[static_cast<std::size_t>(i)] = i;
  return model;
}

std::vector<NystromKrrModel> nystrom_krr_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                             const KernelSpec& spec, double lambda,
                                             std::ptrdiff_t p, std::uint64_t seed) {
  if (x.rows() != y.rows() || x.rows() < 1) throw std::invalid_argument("nystrom_krr_fit: shape mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("nystrom_krr_fit: lambda must be positive");
  if (p < 1 || p > x.rows()) throw std::invalid_argument("nystrom_krr_fit: need 1 <= p <= n");
  if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("nystrom_krr_fit: non-finite inputs");

  Rng rng(seed);
  const auto indices = sample_without_replacement(x.rows(), p, rng);
  Eigen::MatrixXd anchors(p, x.cols());
  for (std::ptrdiff_t i = 0; i < p; ++i) anchors.row(i) = x.row(indices[static_cast<std::size_t>(i)]);

  const Eigen::MatrixXd knp = gaussian_gram(x, anchors, spec);
  const Eigen::MatrixXd kpp = gaussian_gram(anchors, anchors, spec);
  const Eigen::MatrixXd alpha =
      nystrom_krr_solve(knp.transpose() * knp, kpp, knp.transpose() * y, lambda, x.rows());

  std::vector<NystromKrrModel> models;
  models.reserve(static_cast<std::size_t>(y.cols()));
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    NystromKrrModel m;
    m.anchors = anchors;
    m.alpha = alpha.col(c);
    m.spec = spec;
    m.lambda = lambda;
    m.anchor_indices = indices;
    m.seed = seed;
    models.push_back(std::move(m));
  }
  return models;
}

NystromKrrModel nystrom_krr_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const KernelSpec& spec, double lambda,
                                std::ptrdiff_t p, std::uint64_t seed) {
  return nystrom_krr_fit(x, Eigen::MatrixXd(y), spec, lambda, p, seed).front();
}

Eigen::MatrixXd nystrom_krr_solve(const Eigen::MatrixXd& c, const Eigen::MatrixXd& kpp,
                                  const Eigen::MatrixXd& b, double lambda, std::ptrdiff_t n) {
  if (c.rows() != c.cols() || kpp.rows() != c.rows() || kpp.cols() != c.cols() || b.rows() != c.rows())
    throw std::invalid_argument("nystrom_krr_solve: block shapes disagree");
  Eigen::MatrixXd lhs = c;
  lhs.noalias() += (lambda * static_cast<double>(n)) * kpp;
  return detail::pinv_solve_sym(lhs, b, kEigTol);
}

Eigen::VectorXd krr_predict(const NystromKrrModel& model, const Eigen::MatrixXd& x_query) {
  if (x_query.cols() != model.anchors.cols())
    throw std::invalid_argument("krr_predict: feature count differs from anchors");
  return gaussian_gram(x_query, model.anchors, model.spec) * model.alpha;
}

}  // namespace windcast
