#pragma once

#include <cstdint>

#include "windcast/time_series.hpp"

namespace windcast {

/// Stand-in for a real farm: an autocorrelated wind-speed target, "NWP"
/// channels equal to the target plus a smooth stationary error (so the NWP
/// baseline is horizon-flat while persistence degrades), independent decoy
/// channels, and a saturating power channel with optional clamp events.
struct SyntheticFarmSpec {
  std::ptrdiff_t n = 40000;
  double autocorrelation = 0.99;        // AR(1) coefficient of the latent speed driver
  double nwp_error_amplitude = 0.5;     // stationary std of the NWP error, m/s
  double nwp_error_smoothness = 0.995;  // AR(1) coefficient of the NWP error
  int relevant_nwp = 2;                 // channels F1..Fk tracking the target
  int decoy_nwp = 3;                    // channels D1..Dk independent of it
  double clamp_fraction = 0.1;          // share of samples with curtailed power
  std::uint64_t seed = 1;

  void validate() const;
};

/// Channels: WS, PW (in-situ), F1..Fk and D1..Dk (NWP). 10-minute cadence.
TimeSeriesFrame synth_generate(const SyntheticFarmSpec& spec);

/// The generator's noise-free speed-to-power map (cubic ramp between cut-in
/// and rated speed), exposed for curve-recovery tests.
double synth_power_function(double speed);

}  // namespace windcast
