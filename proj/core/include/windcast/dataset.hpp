#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "windcast/time_series.hpp"

namespace windcast {

/// Window geometry in 10-minute steps: l past in-situ lags, an NWP window
/// r0 steps before to r1 steps after the horizon, m forecast horizons.
struct WindowSpec {
  int past_len = 18;
  int nwp_before = 9;
  int nwp_after = 9;
  int horizon_count = 24;

  void validate() const;
};

enum class OffsetBase { Anchor, Horizon };

/// Provenance of one feature column: channel, offset in steps, and whether
/// the offset is relative to the anchor t or to the horizon t+h.
struct FeatureLabel {
  std::string channel;
  int offset = 0;
  OffsetBase base = OffsetBase::Anchor;
  ChannelRole role = ChannelRole::InSitu;
};

/// Joint-dataset marker for build_supervised's horizon argument.
inline constexpr int all_horizons = 0;

struct SupervisedDataset {
  Eigen::MatrixXd X;                       // n x q
  Eigen::MatrixXd Y;                       // n x 1, or n x m for the joint form
  std::vector<FeatureLabel> feature_labels;
  std::vector<std::ptrdiff_t> sample_anchors;  // source index t per row
  int horizon = 1;                          // all_horizons for the joint form

  /// Index of the last in-situ observation a row depends on: the target
  /// index t+h (t+m for the joint form). NWP windows are forecasts and
  /// do not count as observations.
  std::ptrdiff_t last_observed_index(std::ptrdiff_t row) const;
};

/// Assembles the windowed design matrix for one horizon (1..m) or for the
/// joint form (all_horizons). Anchors whose windows leave the series or touch
/// a missing value are dropped. In-situ lags come from InSitu and Target
/// channels; NWP windows from NWP channels.
SupervisedDataset build_supervised(const TimeSeriesFrame& frame, const WindowSpec& spec,
                                   const std::string& target, int horizon);

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // zeros replaced by 1 at fit time
  std::string fitted_on;

  Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const;
  Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& m) const;
};

/// Per-column mean and population standard deviation over rows [row_begin, row_end).
Standardizer fit_standardizer(const Eigen::MatrixXd& m, std::ptrdiff_t row_begin,
                              std::ptrdiff_t row_end, std::string fitted_on = {});

struct IndexRange {
  std::ptrdiff_t begin = 0;
  std::ptrdiff_t end = 0;  // half-open

  std::ptrdiff_t size() const { return end - begin; }
  bool contains(std::ptrdiff_t i) const { return i >= begin && i < end; }
};

struct Split {
  IndexRange train;
  IndexRange val;
  IndexRange test;
};

struct SplitSizes {
  std::ptrdiff_t n_train = 10000;
  std::ptrdiff_t n_val = 10000;
  std::ptrdiff_t n_test = 10000;
};

struct SplitPlan {
  std::vector<Split> splits;
  SplitSizes sizes;
};

/// Tiles [0, n) with consecutive train/val/test blocks. The final test block
/// may be truncated; a split is emitted only if its test part is non-empty.
SplitPlan make_rolling_splits(std::ptrdiff_t n, SplitSizes sizes = {});

}  // namespace windcast
