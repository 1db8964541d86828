#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "windcast/hsic.hpp"

using namespace windcast;

namespace {

Eigen::MatrixXd random_points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
  return x;
}

std::vector<VariableGroup> singleton_groups(Eigen::Index q) {
  std::vector<VariableGroup> groups;
  for (Eigen::Index j = 0; j < q; ++j)
    groups.push_back({"x" + std::to_string(j + 1), {j}});
  return groups;
}

}  // namespace

TEST_SUITE("hsic") {

TEST_CASE("a constant output has zero dependence") {
  const auto x = random_points(25, 3, 1);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Constant(25, 1, 4.2);
  CHECK(std::abs(hsic_exact(x, y, {})) < 1e-12);
  HsicConfig config;
  config.p = 10;
  config.p_prime = 10;
  CHECK(std::abs(nystrom_hsic(x, y, config)) < 1e-10);
}

TEST_CASE("the exact estimator matches the quadruple-sum expansion") {
  Eigen::MatrixXd x(3, 1), y(3, 1);
  x << 0.0, 1.0, 3.0;
  y << 1.0, 0.0, 2.0;
  HsicConfig config;
  config.gamma_x = 0.5;  // 1/(2*1) made explicit so the oracle shares it
  config.gamma_y = 0.5;
  const double value = hsic_exact(x, y, config);
  const double expected = oracle::hsic_quadruple_sum(oracle::gram_loops(x, x, 0.5),
                                                     oracle::gram_loops(y, y, 0.5));
  CHECK(value == doctest::Approx(expected).epsilon(1e-12));

  // Same cross-check on a larger random instance.
  const auto xr = random_points(20, 2, 2);
  const auto yr = random_points(20, 1, 3);
  HsicConfig cr;
  cr.gamma_x = 0.25;
  cr.gamma_y = 0.5;
  const double vr = hsic_exact(xr, yr, cr);
  const double er = oracle::hsic_quadruple_sum(oracle::gram_loops(xr, xr, 0.25),
                                               oracle::gram_loops(yr, yr, 0.5));
  CHECK(vr == doctest::Approx(er).epsilon(1e-10));
}

TEST_CASE("dependent data scores higher than independent data") {
  const auto x = random_points(2000, 1, 4);
  const auto noise = random_points(2000, 1, 5);
  const double indep = hsic_exact(x, noise, {});
  const double dep = hsic_exact(x, x, {});
  CHECK(indep < dep);
}

TEST_CASE("hsic is nonnegative and invariant to joint permutations") {
  const auto x = random_points(30, 2, 6);
  const auto y = random_points(30, 1, 7);
  const double base = hsic_exact(x, y, {});
  CHECK(base >= -1e-12);

  std::vector<Eigen::Index> perm(30);
  for (Eigen::Index i = 0; i < 30; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(8));
  Eigen::MatrixXd xp(30, 2), yp(30, 1);
  for (Eigen::Index i = 0; i < 30; ++i) {
    xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    yp.row(i) = y.row(perm[static_cast<std::size_t>(i)]);
  }
  CHECK(hsic_exact(xp, yp, {}) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("hsic is symmetric under swapping inputs and outputs") {
  const auto x = random_points(24, 3, 9);
  const auto y = random_points(24, 2, 10);
  HsicConfig forward, swapped;
  forward.gamma_x = 0.2;
  forward.gamma_y = 0.7;
  swapped.gamma_x = 0.7;
  swapped.gamma_y = 0.2;
  CHECK(hsic_exact(x, y, forward) == doctest::Approx(hsic_exact(y, x, swapped)).epsilon(1e-12));
}

TEST_CASE("hsic rejects degenerate inputs") {
  const auto x = random_points(5, 2, 11);
  CHECK_THROWS(hsic_exact(x.topRows(1), x.topRows(1), {}));
  CHECK_THROWS(hsic_exact(x, random_points(4, 1, 12), {}));
}

TEST_CASE("nystrom hsic with full anchors equals the exact value") {
  const auto x = random_points(40, 3, 13);
  Eigen::MatrixXd y = x.col(0) + 0.3 * random_points(40, 1, 14);
  HsicConfig config;
  config.p = 40;
  config.p_prime = 40;
  const double exact = hsic_exact(x, y, config);
  const double approx = nystrom_hsic(x, y, config);
  CHECK(std::abs(approx - exact) / exact < 1e-8);
}

TEST_CASE("nystrom hsic is deterministic in the seed") {
  const auto x = random_points(50, 2, 15);
  const auto y = random_points(50, 1, 16);
  HsicConfig config;
  config.p = 12;
  config.p_prime = 9;
  config.seed = 31;
  CHECK(nystrom_hsic(x, y, config) == nystrom_hsic(x, y, config));

  HsicConfig overshoot = config;
  overshoot.p = 51;  // n = 50
  CHECK_THROWS(nystrom_hsic(x, y, overshoot));
  HsicConfig zero = config;
  zero.p = 0;
  CHECK_THROWS(nystrom_hsic(x, y, zero));
}

TEST_CASE("nystrom error shrinks as anchors grow") {
  const auto x = random_points(40, 2, 17);
  Eigen::MatrixXd y = (x.col(0).array().square()).matrix() + 0.2 * random_points(40, 1, 18);
  const double exact = hsic_exact(x, y, {});
  std::vector<double> medians;
  for (std::ptrdiff_t p : {5, 10, 20, 40}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      HsicConfig config;
      config.p = p;
      config.p_prime = p;
      config.seed = seed;
      errs.push_back(std::abs(nystrom_hsic(x, y, config) - exact));
    }
    std::sort(errs.begin(), errs.end());
    medians.push_back(0.5 * (errs[4] + errs[5]));
  }
  for (std::size_t i = 1; i < medians.size(); ++i) CHECK(medians[i] <= medians[i - 1] + 1e-15);
}

TEST_CASE("bahsic keeps the only informative variable") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = random_points(150, 5, 100 + seed);
    const Eigen::MatrixXd y = x.col(0);
    HsicConfig config;
    config.p = 60;
    config.p_prime = 60;
    config.seed = seed;
    const auto trace = bahsic_rank(x, singleton_groups(5), y, config, 0.1, 1);
    REQUIRE(trace.survivors.size() == 1);
    if (trace.survivors[0] == "x1") ++hits;
  }
  CHECK(hits >= 9);
}

TEST_CASE("a two-variable elimination is a single round") {
  const auto x = random_points(60, 2, 19);
  const Eigen::MatrixXd y = x.col(0);
  const auto trace = bahsic_rank(x, singleton_groups(2), y, {}, 0.1, 1);
  REQUIRE(trace.rounds.size() == 1);
  CHECK(trace.rounds[0].eliminated.size() == 1);
  CHECK(trace.survivors.size() == 1);
  CHECK(trace.final_ranking.size() == 2);
}

TEST_CASE("duplicated variables are interchangeable") {
  const auto base = random_points(120, 3, 20);
  Eigen::MatrixXd x(120, 4);
  x.col(0) = base.col(0);
  x.col(1) = base.col(0);  // exact copy
  x.col(2) = base.col(1);
  x.col(3) = base.col(2);
  const Eigen::MatrixXd y = base.col(0);
  std::vector<VariableGroup> groups = {
      {"copyA", {0}}, {"copyB", {1}}, {"noise1", {2}}, {"noise2", {3}}};
  HsicConfig config;
  config.p = 50;
  config.p_prime = 50;
  const auto trace = bahsic_rank(x, groups, y, config, 0.1, 1);
  REQUIRE(trace.survivors.size() == 1);
  const bool copy_survived = trace.survivors[0] == "copyA" || trace.survivors[0] == "copyB";
  CHECK(copy_survived);
}

TEST_CASE("elimination partitions the variable set") {
  const auto x = random_points(80, 7, 21);
  const Eigen::MatrixXd y = x.col(2) + x.col(5);
  const auto trace = bahsic_rank(x, singleton_groups(7), y, {}, 0.3, 2);
  std::set<std::string> seen;
  std::size_t eliminated = 0;
  for (const auto& round : trace.rounds) {
    eliminated += round.eliminated.size();
    for (const auto& name : round.eliminated) CHECK(seen.insert(name).second);
  }
  for (const auto& name : trace.survivors) CHECK(seen.insert(name).second);
  CHECK(seen.size() == 7);
  CHECK(eliminated + trace.survivors.size() == 7);
  CHECK(trace.final_ranking.size() == 7);
  // Survivors sit at the important end of the ranking.
  for (std::size_t i = 0; i < trace.survivors.size(); ++i) {
    const auto& name = trace.final_ranking[trace.final_ranking.size() - 1 - i];
    CHECK(std::find(trace.survivors.begin(), trace.survivors.end(), name) != trace.survivors.end());
  }
}

TEST_CASE("bahsic rejects an unreachable survivor count") {
  const auto x = random_points(30, 3, 22);
  const Eigen::MatrixXd y = x.col(0);
  CHECK_THROWS(bahsic_rank(x, singleton_groups(3), y, {}, 0.1, 3));
  CHECK_THROWS(bahsic_rank(x, singleton_groups(3), y, {}, 0.1, 0));
}

TEST_CASE("importance scores anchor at zero and rank the informative variable") {
  const auto x = random_points(150, 3, 23);
  const Eigen::MatrixXd y = x.col(0);
  HsicConfig config;
  config.p = 60;
  config.p_prime = 60;
  const auto scores = hsic_importance(x, singleton_groups(3), y, config);
  REQUIRE(scores.size() == 3);
  double min_score = 1e9;
  for (const auto& [name, score] : scores) min_score = std::min(min_score, score);
  CHECK(min_score == 0.0);  // the max-HSIC removal normalizes to score zero
  CHECK(scores.at("x1") > scores.at("x2"));
  CHECK(scores.at("x1") > scores.at("x3"));
  CHECK_THROWS(hsic_importance(x, {}, y, config));
}

TEST_CASE("split averaging is key-wise") {
  const std::map<std::string, double> a{{"x1", 0.2}, {"x2", 1.0}};
  const std::map<std::string, double> b{{"x1", 0.4}, {"x2", 0.0}};
  const auto avg = average_scores({a, b});
  CHECK(avg.at("x1") == doctest::Approx(0.3));
  CHECK(avg.at("x2") == doctest::Approx(0.5));
}

TEST_CASE("elimination traces serialize to csv") {
  const auto x = random_points(60, 3, 24);
  const Eigen::MatrixXd y = x.col(0);
  HsicConfig config;
  config.p = 30;
  config.p_prime = 30;
  const auto trace = bahsic_rank(x, singleton_groups(3), y, config, 0.4, 1);
  const auto importance = hsic_importance(x, {{"x1", {0}}}, y, config);
  const auto csv = elimination_csv(trace, importance);
  CHECK(csv.find("variable,round,hsic,score") == 0);
  CHECK(csv.find("x1") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 variables
}

}  // TEST_SUITE
