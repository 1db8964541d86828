#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace windcast {

enum class ChannelRole { InSitu, NWP, Target };

std::string role_name(ChannelRole role);
ChannelRole role_from_name(const std::string& name);

/// One uniformly sampled series. Missing values are NaN.
struct Channel {
  std::string name;
  ChannelRole role = ChannelRole::InSitu;
  std::string unit;
  std::vector<double> values;
};

/// Multi-channel frame on a shared uniform time grid.
/// start_time and cadence are in seconds (Unix epoch / seconds per step).
struct TimeSeriesFrame {
  std::int64_t start_time = 0;
  std::int64_t cadence = 600;
  std::vector<Channel> channels;

  std::ptrdiff_t length() const;
  const Channel* find(const std::string& name) const;
  Channel* find(const std::string& name);
  void validate() const;  // throws on broken invariants
};

/// Parses "YYYY-MM-DD[T ]HH:MM[:SS][Z]" to Unix seconds. Throws on malformed input.
std::int64_t parse_timestamp(const std::string& text);
std::string format_timestamp(std::int64_t unix_seconds);

/// Reads a CSV whose first column is `timestamp` and whose remaining columns
/// are channels declared in `schema`. Empty or unparseable cells become NaN.
/// Timestamps must be strictly increasing; gaps that are a multiple of the
/// inferred cadence are filled with all-missing rows.
TimeSeriesFrame ingest_csv(const std::string& path, const std::map<std::string, ChannelRole>& schema);

/// Interpolates NWP channels linearly onto the finer grid. Non-NWP channels
/// keep their values at original stamps and are missing at new stamps.
/// Segments adjacent to a missing endpoint become missing.
TimeSeriesFrame resample_linear(const TimeSeriesFrame& frame, std::int64_t target_cadence);

/// Replaces a channel of wind directions in degrees by <name>_sin, <name>_cos.
TimeSeriesFrame encode_direction(const TimeSeriesFrame& frame, const std::string& channel);

/// Element-wise mean over frames sharing grid and channel layout.
/// Any missing contributor makes the averaged value missing.
TimeSeriesFrame average_turbines(const std::vector<TimeSeriesFrame>& frames);

/// Concatenates the channels of two frames on their overlapping time range.
/// Cadences must match; channel names must not collide.
TimeSeriesFrame merge_frames(const TimeSeriesFrame& a, const TimeSeriesFrame& b);

/// Inverse of ingest_csv: timestamp column plus one column per channel,
/// missing values as empty cells, numbers at round-trip precision.
std::string frame_to_csv(const TimeSeriesFrame& frame);

}  // namespace windcast
