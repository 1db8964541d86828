#include "windcast/synthetic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "windcast/random.hpp"

namespace windcast {

namespace {

constexpr double kBaseSpeed = 8.0;    // m/s
constexpr double kSpeedScale = 2.5;   // m/s per latent unit
constexpr double kCutIn = 3.0;        // m/s
constexpr double kRatedSpeed = 12.0;  // m/s
constexpr double kRatedPower = 2000.0;  // kW
constexpr double kClampLevel = 1000.0;  // curtailment setpoint, kW
constexpr double kPowerNoise = 20.0;    // kW

// Unit-stationary-variance AR(1) path.
std::vector<double> ar1_path(std::ptrdiff_t n, double phi, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  const double innovation = std::sqrt(1.0 - phi * phi);
  x[0] = gauss(rng);
  for (std::ptrdiff_t t = 1; t < n; ++t)
    x[static_cast<std::size_t>(t)] = phi * x[static_cast<std::size_t>(t - 1)] + innovation * gauss(rng);
  return x;
}

}  // namespace

double synth_power_function(double speed) {
  if (speed < kCutIn) return 0.0;
  if (speed >= kRatedSpeed) return kRatedPower;
  const double ramp = (speed - kCutIn) / (kRatedSpeed - kCutIn);
  return kRatedPower * ramp * ramp * ramp;
}

void SyntheticFarmSpec::validate() const {
  if (n < 2) throw std::invalid_argument("SyntheticFarmSpec: n must be >= 2");
  if (!(autocorrelation >= 0.0) || !(autocorrelation < 1.0))
    throw std::invalid_argument("SyntheticFarmSpec: autocorrelation must lie in [0,1)");
  if (!(nwp_error_smoothness >= 0.0) || !(nwp_error_smoothness < 1.0))
    throw std::invalid_argument("SyntheticFarmSpec: nwp_error_smoothness must lie in [0,1)");
  if (!(nwp_error_amplitude >= 0.0)) throw std::invalid_argument("SyntheticFarmSpec: error amplitude must be >= 0");
  if (relevant_nwp < 1) throw std::invalid_argument("SyntheticFarmSpec: need at least one relevant NWP channel");
  if (decoy_nwp < 0) throw std::invalid_argument("SyntheticFarmSpec: decoy_nwp must be >= 0");
  if (!(clamp_fraction >= 0.0) || !(clamp_fraction <= 1.0))
    throw std::invalid_argument("SyntheticFarmSpec: clamp_fraction must lie in [0,1]");
}

TimeSeriesFrame synth_generate(const SyntheticFarmSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto n = spec.n;
  const auto un = static_cast<std::size_t>(n);

  const auto latent = ar1_path(n, spec.autocorrelation, rng);
  std::vector<double> ws(un);
  for (std::size_t t = 0; t < un; ++t) ws[t] = std::max(0.0, kBaseSpeed + kSpeedScale * latent[t]);

  TimeSeriesFrame frame;
  frame.start_time = parse_timestamp("2025-01-01T00:00:00");
  frame.cadence = 600;
  frame.channels.push_back(Channel{"WS", ChannelRole::InSitu, "m/s", ws});

  {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> pw(un);
    for (std::size_t t = 0; t < un; ++t)
      pw[t] = std::max(0.0, synth_power_function(ws[t]) + kPowerNoise * gauss(rng));
    if (spec.clamp_fraction > 0.0) {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t t = 0; t < un; ++t)
        if (unit(rng) < spec.clamp_fraction) pw[t] = std::min(pw[t], kClampLevel);
    }
    frame.channels.push_back(Channel{"PW", ChannelRole::InSitu, "kW", std::move(pw)});
  }

  for (int c = 0; c < spec.relevant_nwp; ++c) {
    const auto err = ar1_path(n, spec.nwp_error_smoothness, rng);
    std::vector<double> f(un);
    for (std::size_t t = 0; t < un; ++t) f[t] = ws[t] + spec.nwp_error_amplitude * err[t];
    frame.channels.push_back(Channel{"F" + std::to_string(c + 1), ChannelRole::NWP, "m/s", std::move(f)});
  }
  for (int c = 0; c < spec.decoy_nwp; ++c) {
    const auto noise = ar1_path(n, spec.nwp_error_smoothness, rng);
    std::vector<double> d(un);
    for (std::size_t t = 0; t < un; ++t) d[t] = kBaseSpeed + kSpeedScale * noise[t];
    frame.channels.push_back(Channel{"D" + std::to_string(c + 1), ChannelRole::NWP, "m/s", std::move(d)});
  }
  return frame;
}

}  // namespace windcast
