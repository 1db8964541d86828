#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "windcast/dataset.hpp"

using namespace windcast;

namespace {

TimeSeriesFrame ramp_frame(std::ptrdiff_t n) {
  TimeSeriesFrame frame;
  std::vector<double> target(static_cast<std::size_t>(n)), nwp(static_cast<std::size_t>(n));
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    target[static_cast<std::size_t>(t)] = static_cast<double>(t);
    nwp[static_cast<std::size_t>(t)] = 100.0 + static_cast<double>(t);
  }
  frame.channels.push_back({"A", ChannelRole::Target, "", target});
  frame.channels.push_back({"F", ChannelRole::NWP, "", nwp});
  return frame;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("window layout for one in-situ and one NWP channel") {
  const auto frame = ramp_frame(10);
  const WindowSpec spec{2, 1, 1, 3};
  const auto ds = build_supervised(frame, spec, "A", 1);

  REQUIRE(ds.feature_labels.size() == 5);  // 2 lags + 3 NWP offsets
  CHECK(ds.feature_labels[0].channel == "A");
  CHECK(ds.feature_labels[0].offset == -1);
  CHECK(ds.feature_labels[0].base == OffsetBase::Anchor);
  CHECK(ds.feature_labels[1].offset == 0);
  CHECK(ds.feature_labels[2].channel == "F");
  CHECK(ds.feature_labels[2].offset == -1);
  CHECK(ds.feature_labels[2].base == OffsetBase::Horizon);
  CHECK(ds.feature_labels[3].offset == 0);
  CHECK(ds.feature_labels[4].offset == 1);

  // Anchors enumerated by hand: t-1 >= 0 and t+1+1 <= 9 -> t in [1, 7].
  CHECK(ds.sample_anchors == std::vector<std::ptrdiff_t>{1, 2, 3, 4, 5, 6, 7});
  CHECK(ds.sample_anchors == oracle::enumerate_anchors(frame, spec, "A", 1));

  // Row for anchor t=3, horizon 1: lags A[2], A[3]; NWP F[3], F[4], F[5]; y=A[4].
  const Eigen::Index r = 2;
  CHECK(ds.X(r, 0) == 2.0);
  CHECK(ds.X(r, 1) == 3.0);
  CHECK(ds.X(r, 2) == 103.0);
  CHECK(ds.X(r, 3) == 104.0);
  CHECK(ds.X(r, 4) == 105.0);
  CHECK(ds.Y(r, 0) == 4.0);
}

TEST_CASE("pure lag dataset is the shifted series") {
  TimeSeriesFrame frame;
  frame.channels.push_back({"A", ChannelRole::Target, "", {5.0, 7.0, 9.0, 11.0, 13.0, 15.0}});
  const WindowSpec spec{1, 0, 0, 2};
  const auto ds = build_supervised(frame, spec, "A", 2);
  REQUIRE(ds.feature_labels.size() == 1);
  for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
    const auto t = ds.sample_anchors[static_cast<std::size_t>(r)];
    CHECK(ds.X(r, 0) == frame.channels[0].values[static_cast<std::size_t>(t)]);
    CHECK(ds.Y(r, 0) == frame.channels[0].values[static_cast<std::size_t>(t + 2)]);
  }
  CHECK(ds.X.rows() == 4);
}

TEST_CASE("anchors touching a missing value are dropped") {
  auto frame = ramp_frame(12);
  frame.channels[0].values[5] = std::nan("");
  const WindowSpec spec{2, 1, 1, 3};
  const auto ds = build_supervised(frame, spec, "A", 1);
  const auto expected = oracle::enumerate_anchors(frame, spec, "A", 1);
  CHECK(ds.sample_anchors == expected);
  // The lag window covers {t-1, t} and the target index is t+1, so anchors
  // 4, 5 and 6 all touch index 5.
  for (const auto t : ds.sample_anchors) {
    CHECK(t != 4);
    CHECK(t != 5);
    CHECK(t != 6);
  }
  // A missing NWP value knocks out every anchor whose forecast window covers it.
  auto frame2 = ramp_frame(12);
  frame2.channels[1].values[6] = std::nan("");
  const auto ds2 = build_supervised(frame2, spec, "A", 1);
  CHECK(ds2.sample_anchors == oracle::enumerate_anchors(frame2, spec, "A", 1));
}

TEST_CASE("joint dataset spans all horizons") {
  const auto frame = ramp_frame(20);
  const WindowSpec spec{2, 1, 1, 4};
  const auto ds = build_supervised(frame, spec, "A", all_horizons);
  CHECK(ds.Y.cols() == 4);
  // NWP window covers offsets 1-r0 .. m+r1 = 0..5 relative to the anchor.
  int nwp_cols = 0;
  for (const auto& lab : ds.feature_labels)
    if (lab.channel == "F") {
      CHECK(lab.base == OffsetBase::Anchor);
      CHECK(lab.offset >= 0);
      CHECK(lab.offset <= 5);
      ++nwp_cols;
    }
  CHECK(nwp_cols == 6);
  CHECK(ds.sample_anchors == oracle::enumerate_anchors(frame, spec, "A", 0));
  // Targets are the next m values.
  const auto t = ds.sample_anchors[0];
  for (int j = 0; j < 4; ++j) CHECK(ds.Y(0, j) == static_cast<double>(t + 1 + j));
  CHECK(ds.last_observed_index(0) == t + 4);
}

TEST_CASE("in-situ features never look past the anchor") {
  const auto frame = ramp_frame(40);
  for (int h : {1, 3}) {
    const auto ds = build_supervised(frame, WindowSpec{4, 2, 2, 3}, "A", h);
    for (const auto& lab : ds.feature_labels) {
      if (lab.role == ChannelRole::NWP) continue;
      CHECK(lab.base == OffsetBase::Anchor);
      CHECK(lab.offset <= 0);
    }
  }
}

TEST_CASE("identical inputs build bit-identical datasets") {
  const auto frame = ramp_frame(30);
  const WindowSpec spec{3, 2, 1, 4};
  const auto a = build_supervised(frame, spec, "A", 2);
  const auto b = build_supervised(frame, spec, "A", 2);
  CHECK(a.X == b.X);
  CHECK(a.Y == b.Y);
  CHECK(a.sample_anchors == b.sample_anchors);
}

TEST_CASE("horizon bounds are enforced") {
  const auto frame = ramp_frame(30);
  const WindowSpec spec{2, 1, 1, 4};
  CHECK_THROWS(build_supervised(frame, spec, "A", 5));
  CHECK_THROWS(build_supervised(frame, spec, "A", -1));
  CHECK_THROWS(build_supervised(frame, spec, "B", 1));
  // All rows dropped -> error rather than an empty dataset.
  auto all_missing = ramp_frame(30);
  for (auto& v : all_missing.channels[0].values) v = std::nan("");
  CHECK_THROWS(build_supervised(all_missing, spec, "A", 1));
}

TEST_CASE("standardizer matches the population convention") {
  Eigen::MatrixXd m(2, 1);
  m << 1.0, 3.0;
  const auto s = fit_standardizer(m, 0, 2);
  CHECK(s.mean[0] == doctest::Approx(2.0));
  CHECK(s.std[0] == doctest::Approx(1.0));  // population: sqrt(((1)^2+(1)^2)/2)
}

TEST_CASE("constant columns standardize with unit scale") {
  Eigen::MatrixXd m(3, 2);
  m << 7.0, 1.0, 7.0, 2.0, 7.0, 3.0;
  const auto s = fit_standardizer(m, 0, 3);
  CHECK(s.mean[0] == 7.0);
  CHECK(s.std[0] == 1.0);
  const Eigen::MatrixXd z = s.transform(m);
  CHECK(z.col(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transform then inverse transform is the identity") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(3.0, 11.0);
  Eigen::MatrixXd m(40, 5);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = gauss(rng);
  const auto s = fit_standardizer(m, 5, 30);
  const Eigen::MatrixXd back = s.inverse_transform(s.transform(m));
  CHECK(((back - m).cwiseAbs().maxCoeff() / m.cwiseAbs().maxCoeff()) < 1e-12);
}

TEST_CASE("standardizer rejects an empty row range") {
  Eigen::MatrixXd m(4, 2);
  m.setZero();
  CHECK_THROWS(fit_standardizer(m, 2, 2));
  CHECK_THROWS(fit_standardizer(m, 3, 5));
}

TEST_CASE("one split exactly covers thirty thousand rows") {
  const auto plan = make_rolling_splits(30000);
  REQUIRE(plan.splits.size() == 1);
  CHECK(plan.splits[0].train.begin == 0);
  CHECK(plan.splits[0].train.end == 10000);
  CHECK(plan.splits[0].val.begin == 10000);
  CHECK(plan.splits[0].val.end == 20000);
  CHECK(plan.splits[0].test.begin == 20000);
  CHECK(plan.splits[0].test.end == 30000);
}

TEST_CASE("the final test block may be truncated") {
  // A third split needs its own train and val ahead of the leftover rows, so
  // the first length at which a truncated 5000-row test appears is 85000.
  const auto plan = make_rolling_splits(85000);
  REQUIRE(plan.splits.size() == 3);
  CHECK(plan.splits[2].train.begin == 60000);
  CHECK(plan.splits[2].test.begin == 80000);
  CHECK(plan.splits[2].test.end == 85000);
  CHECK(plan.splits[2].test.size() == 5000);

  // 65000 rows leave a 5000-row tail that cannot seat another split: the
  // would-be third split has no room for train+val+test, so it is not emitted.
  const auto two = make_rolling_splits(65000);
  CHECK(two.splits.size() == 2);
  CHECK(two.splits[1].test.end == 60000);
}

TEST_CASE("splits are ordered, disjoint and tiled") {
  const auto plan = make_rolling_splits(100000, {8000, 4000, 6000});
  REQUIRE(plan.splits.size() == 5);  // stride 18000; base 90000 has no val room
  for (std::size_t s = 0; s < plan.splits.size(); ++s) {
    const auto& sp = plan.splits[s];
    CHECK(sp.train.end == sp.val.begin);
    CHECK(sp.val.end == sp.test.begin);
    CHECK(sp.train.size() == 8000);
    CHECK(sp.val.size() == 4000);
    if (s + 1 < plan.splits.size()) {
      CHECK(sp.test.size() == 6000);
      CHECK(plan.splits[s + 1].train.begin == sp.test.end);
    }
  }
  CHECK(plan.splits.back().test.end <= 100000);
}

TEST_CASE("too little data for one split is an error") {
  CHECK_THROWS(make_rolling_splits(15000));  // 15000 < 10000 + 10000 + 1
  CHECK_THROWS(make_rolling_splits(20000));
  CHECK(make_rolling_splits(20001).splits.size() == 1);
  CHECK(make_rolling_splits(20001).splits[0].test.size() == 1);
}

}  // TEST_SUITE
