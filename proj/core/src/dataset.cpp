#include "windcast/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace windcast {

void WindowSpec::validate() const {
  if (past_len < 1) throw std::invalid_argument("WindowSpec: past_len must be >= 1");
  if (horizon_count < 1) throw std::invalid_argument("WindowSpec: horizon_count must be >= 1");
  if (nwp_before < 0 || nwp_after < 0) throw std::invalid_argument("WindowSpec: nwp_before/nwp_after must be >= 0");
}

std::ptrdiff_t SupervisedDataset::last_observed_index(std::ptrdiff_t row) const {
  const std::ptrdiff_t t = sample_anchors.at(static_cast<std::size_t>(row));
  return horizon == all_horizons ? t + Y.cols() : t + horizon;
}

SupervisedDataset build_supervised(const TimeSeriesFrame& frame, const WindowSpec& spec,
                                   const std::string& target, int horizon) {
  frame.validate();
  spec.validate();
  if (horizon != all_horizons && (horizon < 1 || horizon > spec.horizon_count))
    throw std::invalid_argument("build_supervised: horizon out of range");
  const Channel* target_ch = frame.find(target);
  if (target_ch == nullptr) throw std::invalid_argument("build_supervised: no channel named " + target);

  const bool joint = horizon == all_horizons;
  const int l = spec.past_len;
  const int m = spec.horizon_count;
  const int r0 = spec.nwp_before;
  const int r1 = spec.nwp_after;

  // Column layout: channels in frame order; in-situ lags at offsets -l+1..0
  // from the anchor, NWP windows at -r0..+r1 from the horizon (or +1-r0..+m+r1
  // from the anchor in the joint form).
  std::vector<FeatureLabel> labels;
  for (const auto& ch : frame.channels) {
    if (ch.role == ChannelRole::NWP) {
      if (joint) {
        for (int off = 1 - r0; off <= m + r1; ++off)
          labels.push_back(FeatureLabel{ch.name, off, OffsetBase::Anchor, ch.role});
      } else {
        for (int off = -r0; off <= r1; ++off)
          labels.push_back(FeatureLabel{ch.name, off, OffsetBase::Horizon, ch.role});
      }
    } else {
      for (int off = 1 - l; off <= 0; ++off)
        labels.push_back(FeatureLabel{ch.name, off, OffsetBase::Anchor, ch.role});
    }
  }
  const auto q = static_cast<std::ptrdiff_t>(labels.size());
  if (q == 0) throw std::invalid_argument("build_supervised: frame has no usable channels");

  const std::ptrdiff_t n = frame.length();
  const int h_lo = joint ? 1 : horizon;
  const int h_hi = joint ? m : horizon;
  bool has_nwp = false;
  for (const auto& ch : frame.channels) has_nwp |= ch.role == ChannelRole::NWP;

  // Anchor t is feasible when every referenced index lies in [0, n).
  std::ptrdiff_t t_min = static_cast<std::ptrdiff_t>(l) - 1;
  if (has_nwp) t_min = std::max(t_min, static_cast<std::ptrdiff_t>(r0 - h_lo));
  std::ptrdiff_t t_max = n - 1 - h_hi;
  if (has_nwp) t_max = std::min(t_max, n - 1 - h_hi - r1);

  const int y_cols = joint ? m : 1;
  std::vector<const std::vector<double>*> col_src(static_cast<std::size_t>(q));
  std::vector<std::ptrdiff_t> col_shift(static_cast<std::size_t>(q));
  for (std::ptrdiff_t c = 0; c < q; ++c) {
    const auto& lab = labels[static_cast<std::size_t>(c)];
    col_src[static_cast<std::size_t>(c)] = &frame.find(lab.channel)->values;
    col_shift[static_cast<std::size_t>(c)] = lab.offset + (lab.base == OffsetBase::Horizon ? horizon : 0);
  }

  std::vector<std::ptrdiff_t> anchors;
  std::vector<double> x_rows, y_rows;
  if (t_max >= t_min) {
    x_rows.reserve(static_cast<std::size_t>((t_max - t_min + 1) * q));
    y_rows.reserve(static_cast<std::size_t>((t_max - t_min + 1) * y_cols));
  }
  std::vector<double> row(static_cast<std::size_t>(q));
  std::vector<double> yrow(static_cast<std::size_t>(y_cols));

  for (std::ptrdiff_t t = t_min; t <= t_max; ++t) {
    bool ok = true;
    for (std::ptrdiff_t c = 0; ok && c < q; ++c) {
      const double v = (*col_src[static_cast<std::size_t>(c)])[static_cast<std::size_t>(t + col_shift[static_cast<std::size_t>(c)])];
      if (std::isnan(v)) ok = false;
      row[static_cast<std::size_t>(c)] = v;
    }
    for (int j = 0; ok && j < y_cols; ++j) {
      const double v = target_ch->values[static_cast<std::size_t>(t + h_lo + j)];
      if (std::isnan(v)) ok = false;
      yrow[static_cast<std::size_t>(j)] = v;
    }
    if (!ok) continue;
    anchors.push_back(t);
    x_rows.insert(x_rows.end(), row.begin(), row.end());
    y_rows.insert(y_rows.end(), yrow.begin(), yrow.end());
  }
  if (anchors.empty()) throw std::runtime_error("build_supervised: no complete samples after dropping missing windows");

  SupervisedDataset ds;
  ds.feature_labels = std::move(labels);
  ds.sample_anchors = std::move(anchors);
  ds.horizon = horizon;
  const auto rows = static_cast<Eigen::Index>(ds.sample_anchors.size());
  ds.X = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      x_rows.data(), rows, static_cast<Eigen::Index>(q));
  ds.Y = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      y_rows.data(), rows, static_cast<Eigen::Index>(y_cols));
  return ds;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& m) const {
  if (m.cols() != mean.size()) throw std::invalid_argument("Standardizer: column count mismatch");
  return (m.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

Eigen::MatrixXd Standardizer::inverse_transform(const Eigen::MatrixXd& m) const {
  if (m.cols() != mean.size()) throw std::invalid_argument("Standardizer: column count mismatch");
  return (m.array().rowwise() * std.transpose().array()).rowwise() + mean.transpose().array();
}

Standardizer fit_standardizer(const Eigen::MatrixXd& m, std::ptrdiff_t row_begin,
                              std::ptrdiff_t row_end, std::string fitted_on) {
  if (row_begin < 0 || row_end > m.rows() || row_begin >= row_end)
    throw std::invalid_argument("fit_standardizer: empty or invalid row range");
  const auto block = m.middleRows(row_begin, row_end - row_begin);
  Standardizer s;
  s.fitted_on = std::move(fitted_on);
  s.mean = block.colwise().mean();
  const auto centered = block.rowwise() - s.mean.transpose();
  s.std = (centered.array().square().colwise().mean()).sqrt();
  for (Eigen::Index j = 0; j < s.std.size(); ++j)
    if (s.std[j] == 0.0) s.std[j] = 1.0;
  return s;
}

SplitPlan make_rolling_splits(std::ptrdiff_t n, SplitSizes sizes) {
  if (sizes.n_train < 1 || sizes.n_val < 1 || sizes.n_test < 1)
    throw std::invalid_argument("make_rolling_splits: part sizes must be positive");
  if (n < sizes.n_train + sizes.n_val + 1)
    throw std::invalid_argument("make_rolling_splits: n too small for one split");

  SplitPlan plan;
  plan.sizes = sizes;
  const std::ptrdiff_t stride = sizes.n_train + sizes.n_val + sizes.n_test;
  for (std::ptrdiff_t base = 0; base + sizes.n_train + sizes.n_val < n; base += stride) {
    Split s;
    s.train = {base, base + sizes.n_train};
    s.val = {s.train.end, s.train.end + sizes.n_val};
    s.test = {s.val.end, std::min(s.val.end + sizes.n_test, n)};
    plan.splits.push_back(s);
  }
  return plan;
}

}  // namespace windcast
