#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "windcast/evaluation.hpp"
#include "windcast/synthetic.hpp"

using namespace windcast;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double persistence_nrmse(const std::vector<double>& ws, int horizon, double z_bar) {
  std::vector<std::ptrdiff_t> anchors;
  for (std::ptrdiff_t t = 0; t + 24 < static_cast<std::ptrdiff_t>(ws.size()); ++t) anchors.push_back(t);
  const Eigen::VectorXd pred = persistence_forecast(ws, anchors, horizon);
  Eigen::VectorXd truth(static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t i = 0; i < anchors.size(); ++i)
    truth[static_cast<Eigen::Index>(i)] = ws[static_cast<std::size_t>(anchors[i] + horizon)];
  return nrmse(pred, truth, z_bar);
}

}  // namespace

TEST_SUITE("synthetic") {

TEST_CASE("the generated frame has the documented channel layout") {
  SyntheticFarmSpec spec;
  spec.n = 2000;
  const auto frame = synth_generate(spec);
  frame.validate();
  CHECK(frame.cadence == 600);
  CHECK(frame.start_time == parse_timestamp("2025-01-01T00:00:00"));
  CHECK(frame.length() == 2000);
  REQUIRE(frame.channels.size() == 7);  // WS, PW, F1..F2, D1..D3

  const Channel* ws = frame.find("WS");
  REQUIRE(ws != nullptr);
  CHECK(ws->role == ChannelRole::InSitu);
  CHECK(ws->unit == "m/s");
  CHECK(std::all_of(ws->values.begin(), ws->values.end(), [](double v) { return v >= 0.0; }));

  const Channel* pw = frame.find("PW");
  REQUIRE(pw != nullptr);
  CHECK(pw->role == ChannelRole::InSitu);
  CHECK(pw->unit == "kW");

  for (const char* name : {"F1", "F2", "D1", "D2", "D3"}) {
    const Channel* ch = frame.find(name);
    REQUIRE(ch != nullptr);
    CHECK(ch->role == ChannelRole::NWP);
  }
  CHECK(frame.find("F3") == nullptr);
}

TEST_CASE("zero error amplitude makes the NWP channel an oracle") {
  SyntheticFarmSpec spec;
  spec.n = 3000;
  spec.nwp_error_amplitude = 0.0;
  const auto frame = synth_generate(spec);
  const auto& ws = frame.find("WS")->values;
  const auto& f1 = frame.find("F1")->values;
  REQUIRE(ws.size() == f1.size());
  for (std::size_t t = 0; t < ws.size(); ++t) CHECK(f1[t] == ws[t]);

  std::vector<std::ptrdiff_t> anchors;
  for (std::ptrdiff_t t = 0; t + 24 < 3000; ++t) anchors.push_back(t);
  for (int h : {1, 12, 24}) {
    const Eigen::VectorXd pred = nwp_forecast(frame, "F1", anchors, h);
    Eigen::VectorXd truth(static_cast<Eigen::Index>(anchors.size()));
    for (std::size_t i = 0; i < anchors.size(); ++i)
      truth[static_cast<Eigen::Index>(i)] = ws[static_cast<std::size_t>(anchors[i] + h)];
    CHECK(nrmse(pred, truth, mean_of(ws)) == 0.0);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  SyntheticFarmSpec spec;
  spec.n = 1500;
  spec.seed = 42;
  const auto a = synth_generate(spec);
  const auto b = synth_generate(spec);
  REQUIRE(a.channels.size() == b.channels.size());
  CHECK(a.start_time == b.start_time);
  CHECK(a.cadence == b.cadence);
  for (std::size_t c = 0; c < a.channels.size(); ++c) {
    CHECK(a.channels[c].name == b.channels[c].name);
    CHECK(a.channels[c].values == b.channels[c].values);
  }
  spec.seed = 43;
  const auto other = synth_generate(spec);
  CHECK(other.find("WS")->values != a.find("WS")->values);
}

TEST_CASE("persistence error at four hours is more than twice the ten-minute error") {
  std::vector<double> ratios;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticFarmSpec spec;
    spec.n = 40000;
    spec.autocorrelation = 0.99;
    spec.seed = seed;
    const auto frame = synth_generate(spec);
    const auto& ws = frame.find("WS")->values;
    const double z_bar = mean_of(ws);
    ratios.push_back(persistence_nrmse(ws, 24, z_bar) / persistence_nrmse(ws, 1, z_bar));
  }
  std::sort(ratios.begin(), ratios.end());
  CHECK(ratios[2] > 2.0);
}

TEST_CASE("the power map is a cubic ramp between cut-in and rated speed") {
  CHECK(synth_power_function(0.0) == 0.0);
  CHECK(synth_power_function(2.9) == 0.0);
  CHECK(synth_power_function(3.0) == 0.0);
  CHECK(synth_power_function(7.5) == 250.0);  // 2000 * 0.5^3
  CHECK(synth_power_function(12.0) == 2000.0);
  CHECK(synth_power_function(20.0) == 2000.0);
  for (double s = 0.0; s < 15.0; s += 0.1)
    CHECK(synth_power_function(s + 0.1) >= synth_power_function(s));
}

TEST_CASE("the power channel tracks the ramp up to bounded noise") {
  SyntheticFarmSpec spec;
  spec.n = 5000;
  spec.clamp_fraction = 0.0;
  spec.seed = 9;
  const auto frame = synth_generate(spec);
  const auto& ws = frame.find("WS")->values;
  const auto& pw = frame.find("PW")->values;
  double sq = 0.0, worst = 0.0;
  for (std::size_t t = 0; t < ws.size(); ++t) {
    const double diff = pw[t] - synth_power_function(ws[t]);
    sq += diff * diff;
    worst = std::max(worst, std::abs(diff));
  }
  const double rms = std::sqrt(sq / static_cast<double>(ws.size()));
  CHECK(rms > 10.0);   // noise is real
  CHECK(rms < 30.0);   // and small against the 2000 kW scale
  CHECK(worst < 150.0);
  CHECK(*std::min_element(pw.begin(), pw.end()) >= 0.0);
}

TEST_CASE("clamping caps the affected samples at the setpoint") {
  SyntheticFarmSpec clean_spec;
  clean_spec.n = 20000;
  clean_spec.clamp_fraction = 0.0;
  clean_spec.seed = 5;
  auto half_spec = clean_spec;
  half_spec.clamp_fraction = 0.5;
  const auto clean = synth_generate(clean_spec);
  const auto half = synth_generate(half_spec);

  // The speed path and pre-clamp power noise precede the clamp draws in the
  // generator stream, so WS matches across the two settings.
  CHECK(clean.find("WS")->values == half.find("WS")->values);

  const auto& pw0 = clean.find("PW")->values;
  const auto& pw5 = half.find("PW")->values;
  std::ptrdiff_t above = 0, touched = 0;
  for (std::size_t t = 0; t < pw0.size(); ++t) {
    if (pw5[t] != pw0[t]) {
      ++touched;
      CHECK(pw5[t] == 1000.0);
      CHECK(pw0[t] > 1000.0);
    }
    if (pw0[t] > 1000.0) ++above;
  }
  REQUIRE(above > 1000);
  const double share = static_cast<double>(touched) / static_cast<double>(above);
  CHECK(share > 0.45);
  CHECK(share < 0.55);

  SyntheticFarmSpec full = clean_spec;
  full.clamp_fraction = 1.0;
  const auto full_frame = synth_generate(full);
  const auto& pwf = full_frame.find("PW")->values;
  CHECK(*std::max_element(pwf.begin(), pwf.end()) <= 1000.0);
  CHECK(*std::max_element(pw0.begin(), pw0.end()) > 1500.0);
}

TEST_CASE("invalid farm specs are rejected") {
  const auto broken = [](auto mutate) {
    SyntheticFarmSpec spec;
    spec.n = 100;
    mutate(spec);
    return spec;
  };
  CHECK_THROWS(synth_generate(broken([](auto& s) { s.n = 1; })));
  CHECK_THROWS(synth_generate(broken([](auto& s) { s.autocorrelation = 1.0; })));
  CHECK_THROWS(synth_generate(broken([](auto& s) { s.autocorrelation = -0.1; })));
  CHECK_THROWS(synth_generate(broken([](auto& s) { s.nwp_error_smoothness = 1.0; })));
  CHECK_THROWS(synth_generate(broken([](auto& s) { s.nwp_error_amplitude = -0.5; })));
  CHECK_THROWS(synth_generate(broken([](auto& s) { s.relevant_nwp = 0; })));
  CHECK_THROWS(synth_generate(broken([](auto& s) { s.decoy_nwp = -1; })));
  CHECK_THROWS(synth_generate(broken([](auto& s) { s.clamp_fraction = 1.5; })));
}

}  // TEST_SUITE
