#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "windcast/kernel.hpp"

using namespace windcast;

namespace {

Eigen::MatrixXd random_points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
  return x;
}

Eigen::VectorXd smooth_targets(const Eigen::MatrixXd& x, std::uint64_t seed) {
  Eigen::VectorXd y = (x.col(0).array().sin() + 0.5 * x.col(x.cols() - 1).array()).matrix();
  y += 0.05 * random_points(x.rows(), 1, seed);
  return y;
}

}  // namespace

TEST_SUITE("kernel") {

TEST_CASE("gram diagonal is one and the gamma to zero limit is flat") {
  const auto a = random_points(12, 3, 1);
  const auto k = gaussian_gram(a, a, KernelSpec{0.7});
  for (Eigen::Index i = 0; i < 12; ++i) CHECK(k(i, i) == 1.0);

  const auto flat = gaussian_gram(a, a, KernelSpec{1e-300});
  CHECK((flat.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("gram entries match the scalar exponential") {
  Eigen::MatrixXd a(1, 1), b(1, 1);
  a << 0.0;
  b << 1.0;
  const auto k = gaussian_gram(a, b, KernelSpec{1.0});
  CHECK(k(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  const auto k4 = gaussian_gram(a, b, KernelSpec{4.0});
  CHECK(k4(0, 0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
}

TEST_CASE("gram matches the loop oracle and rejects mismatched dimensions") {
  const auto a = random_points(9, 4, 2);
  const auto b = random_points(7, 4, 3);
  const auto k = gaussian_gram(a, b, KernelSpec{0.31});
  const auto expected = oracle::gram_loops(a, b, 0.31);
  CHECK((k - expected).cwiseAbs().maxCoeff() < 1e-13);
  CHECK_THROWS(gaussian_gram(a, random_points(7, 3, 4), KernelSpec{0.31}));
  CHECK_THROWS(gaussian_gram(a, b, KernelSpec{-1.0}));
}

TEST_CASE("gram of a point set is symmetric and positive semi-definite") {
  const auto a = random_points(20, 5, 5);
  const auto k = gaussian_gram(a, a, KernelSpec{0.4});
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
}

TEST_CASE("exact krr on a single point reduces to the scalar closed form") {
  Eigen::MatrixXd x(1, 1);
  x << 0.0;
  Eigen::VectorXd y(1);
  y << 1.0;
  const auto model = krr_fit_exact(x, y, KernelSpec{1.0}, 1.0);
  CHECK(model.alpha[0] == doctest::Approx(0.5).epsilon(1e-12));  // (1 + 1*1)^-1
  CHECK(krr_predict(model, x)[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("exact krr predictions shrink as lambda grows") {
  const auto x = random_points(40, 2, 7);
  const Eigen::VectorXd y = smooth_targets(x, 8);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1e-3, 1e-1, 10.0, 1000.0}) {
    const auto model = krr_fit_exact(x, y, KernelSpec{0.5}, lambda);
    const double norm = krr_predict(model, x).norm();
    CHECK(norm < prev);
    prev = norm;
  }
}

TEST_CASE("exact krr solves its linear system") {
  const auto x = random_points(30, 2, 9);
  const Eigen::VectorXd y = smooth_targets(x, 10);
  const double lambda = 0.05;
  const auto model = krr_fit_exact(x, y, KernelSpec{0.8}, lambda);
  const auto k = gaussian_gram(x, x, KernelSpec{0.8});
  const Eigen::VectorXd residual =
      (k + 30.0 * lambda * Eigen::MatrixXd::Identity(30, 30)) * model.alpha - y;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("exact krr with tiny lambda interpolates distinct points") {
  const auto x = random_points(25, 2, 11);
  const Eigen::VectorXd y = smooth_targets(x, 12);
  const auto model = krr_fit_exact(x, y, KernelSpec{0.6}, 1e-10);
  CHECK((krr_predict(model, x) - y).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("nystrom krr with all anchors matches exact krr") {
  const auto x = random_points(50, 6, 13);
  const Eigen::VectorXd y = smooth_targets(x, 14);
  const auto queries = random_points(40, 6, 15);
  const auto exact = krr_fit_exact(x, y, KernelSpec{1.0 / 12.0}, 0.1);
  const auto ny = nystrom_krr_fit(x, y, KernelSpec{1.0 / 12.0}, 0.1, 50, 99);
  const Eigen::VectorXd pe = krr_predict(exact, queries);
  const Eigen::VectorXd pn = krr_predict(ny, queries);
  CHECK((pe - pn).norm() / pe.norm() < 1e-6);
}

TEST_CASE("nystrom krr with one anchor is a single kernel bump") {
  Eigen::MatrixXd x(3, 1);
  x << -1.0, 0.0, 1.0;
  Eigen::VectorXd y(3);
  y << 0.5, 1.0, 0.5;
  const double gamma = 0.9, lambda = 0.01;
  const auto model = nystrom_krr_fit(x, y, KernelSpec{gamma}, lambda, 1, 7);
  REQUIRE(model.anchors.rows() == 1);
  const double a = model.anchors(0, 0);
  // Normal equations collapse to scalars: alpha = knp.y / (knp.knp + 3*lambda).
  double knp_y = 0.0, knp_knp = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double k = std::exp(-gamma * (x(i, 0) - a) * (x(i, 0) - a));
    knp_y += k * y[i];
    knp_knp += k * k;
  }
  const double expected = knp_y / (knp_knp + 3.0 * lambda);  // Kpp = 1
  CHECK(model.alpha[0] == doctest::Approx(expected).epsilon(1e-10));
  Eigen::MatrixXd q(1, 1);
  q << 0.3;
  const double kq = std::exp(-gamma * (0.3 - a) * (0.3 - a));
  CHECK(krr_predict(model, q)[0] == doctest::Approx(expected * kq).epsilon(1e-12));
}

TEST_CASE("the anchor sample is a deterministic function of the seed") {
  const auto x = random_points(60, 3, 17);
  const Eigen::VectorXd y = smooth_targets(x, 18);
  const auto a = nystrom_krr_fit(x, y, KernelSpec{0.2}, 0.05, 12, 42);
  const auto b = nystrom_krr_fit(x, y, KernelSpec{0.2}, 0.05, 12, 42);
  CHECK(a.anchor_indices == b.anchor_indices);
  CHECK(a.alpha == b.alpha);
  const auto c = nystrom_krr_fit(x, y, KernelSpec{0.2}, 0.05, 12, 43);
  CHECK(a.anchor_indices != c.anchor_indices);
}

TEST_CASE("anchor counts beyond n are rejected") {
  const auto x = random_points(10, 2, 19);
  const Eigen::VectorXd y = smooth_targets(x, 20);
  CHECK_THROWS(nystrom_krr_fit(x, y, KernelSpec{0.2}, 0.05, 11, 1));
  CHECK_THROWS(nystrom_krr_fit(x, y, KernelSpec{0.2}, 0.05, 0, 1));
  CHECK_THROWS(nystrom_krr_fit(x, y, KernelSpec{0.2}, -0.05, 5, 1));
}

TEST_CASE("prediction error is non-increasing in the anchor count") {
  const auto x = random_points(200, 3, 21);
  const Eigen::VectorXd y = smooth_targets(x, 22);
  const auto queries = random_points(150, 3, 23);
  const auto exact = krr_fit_exact(x, y, KernelSpec{1.0 / 6.0}, 0.01);
  const Eigen::VectorXd reference = krr_predict(exact, queries);

  std::vector<double> medians;
  for (std::ptrdiff_t p : {10, 40, 160}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto model = nystrom_krr_fit(x, y, KernelSpec{1.0 / 6.0}, 0.01, p, seed);
      errs.push_back((krr_predict(model, queries) - reference).norm());
    }
    std::sort(errs.begin(), errs.end());
    medians.push_back(0.5 * (errs[4] + errs[5]));
  }
  CHECK(medians[1] <= medians[0]);
  CHECK(medians[2] <= medians[1]);
}

TEST_CASE("krr predict covers the trivial identities") {
  NystromKrrModel zero;
  zero.anchors = random_points(4, 2, 25);
  zero.alpha = Eigen::VectorXd::Zero(4);
  zero.spec = KernelSpec{0.5};
  const auto q = random_points(6, 2, 26);
  CHECK(krr_predict(zero, q).cwiseAbs().maxCoeff() == 0.0);

  NystromKrrModel lone;
  lone.anchors = Eigen::MatrixXd(1, 2);
  lone.anchors << 1.5, -0.5;
  lone.alpha = Eigen::VectorXd::Constant(1, 3.25);
  lone.spec = KernelSpec{2.0};
  CHECK(krr_predict(lone, lone.anchors)[0] == doctest::Approx(3.25).epsilon(1e-12));

  NystromKrrModel hand;
  hand.anchors = Eigen::MatrixXd(3, 1);
  hand.anchors << 0.0, 1.0, 2.0;
  hand.alpha = Eigen::VectorXd(3);
  hand.alpha << 1.0, -2.0, 0.5;
  hand.spec = KernelSpec{0.25};
  Eigen::MatrixXd at(1, 1);
  at << 0.5;
  double manual = 0.0;
  for (int j = 0; j < 3; ++j)
    manual += hand.alpha[j] * std::exp(-0.25 * (0.5 - hand.anchors(j, 0)) * (0.5 - hand.anchors(j, 0)));
  CHECK(krr_predict(hand, at)[0] == doctest::Approx(manual).epsilon(1e-12));

  CHECK_THROWS(krr_predict(hand, q));
}

TEST_CASE("the exposed solve reproduces a fitted model from its blocks") {
  const auto x = random_points(45, 3, 27);
  const Eigen::VectorXd y = smooth_targets(x, 28);
  const KernelSpec spec{0.3};
  const double lambda = 0.02;
  const auto model = nystrom_krr_fit(x, y, spec, lambda, 15, 5);
  const auto knp = gaussian_gram(x, model.anchors, spec);
  const auto kpp = gaussian_gram(model.anchors, model.anchors, spec);
  const Eigen::MatrixXd alpha =
      nystrom_krr_solve(knp.transpose() * knp, kpp, knp.transpose() * y, lambda, 45);
  CHECK((alpha.col(0) - model.alpha).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("matrix targets share the anchor sample across columns") {
  const auto x = random_points(40, 2, 29);
  Eigen::MatrixXd y(40, 2);
  y.col(0) = smooth_targets(x, 30);
  y.col(1) = smooth_targets(x, 31);
  const auto models = nystrom_krr_fit(x, y, KernelSpec{0.4}, 0.05, 10, 77);
  REQUIRE(models.size() == 2);
  CHECK(models[0].anchor_indices == models[1].anchor_indices);
  const auto single = nystrom_krr_fit(x, Eigen::VectorXd(y.col(0)), KernelSpec{0.4}, 0.05, 10, 77);
  CHECK((models[0].alpha - single.alpha).cwiseAbs().maxCoeff() < 1e-12);
}

}  // TEST_SUITE
