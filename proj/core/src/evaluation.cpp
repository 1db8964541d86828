#include "windcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

namespace windcast {

Eigen::VectorXd persistence_forecast(const std::vector<double>& y,
                                     const std::vector<std::ptrdiff_t>& anchors, int horizon) {
  if (horizon < 1) throw std::invalid_argument("persistence_forecast: horizon must be >= 1");
  const auto n = static_cast<std::ptrdiff_t>(y.size());
  Eigen::VectorXd out(static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto t = anchors[i];
    // Only y[t] is read: the forecast itself is valid past the end of the
    // series, so the anchor alone is bounds-checked.
    if (t < 0 || t >= n) throw std::invalid_argument("persistence_forecast: anchor beyond series");
    out[static_cast<Eigen::Index>(i)] = y[static_cast<std::size_t>(t)];
  }
  return out;
}

Eigen::VectorXd nwp_forecast(const TimeSeriesFrame& frame, const std::string& nwp_channel,
                             const std::vector<std::ptrdiff_t>& anchors, int horizon,
                             const PowerCurve* curve) {
  if (horizon < 1) throw std::invalid_argument("nwp_forecast: horizon must be >= 1");
  const Channel* ch = frame.find(nwp_channel);
  if (ch == nullptr) throw std::invalid_argument("nwp_forecast: no channel named " + nwp_channel);
  const auto n = static_cast<std::ptrdiff_t>(ch->values.size());
  Eigen::VectorXd out(static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto t = anchors[i];
    if (t < 0 || t + horizon >= n)
      throw std::invalid_argument("nwp_forecast: anchor + horizon beyond series");
    out[static_cast<Eigen::Index>(i)] = ch->values[static_cast<std::size_t>(t + horizon)];
  }
  return curve != nullptr ? curve->predict(out) : out;
}

double nrmse(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y, double z_bar) {
  if (y_hat.size() != y.size() || y.size() < 1) throw std::invalid_argument("nrmse: length mismatch");
  if (z_bar == 0.0) throw std::invalid_argument("nrmse: z_bar is zero (degenerate target)");
  return std::sqrt((y_hat - y).squaredNorm() / static_cast<double>(y.size())) / z_bar;
}

double delta_nrmse(double score, const std::vector<double>& baseline_scores) {
  if (baseline_scores.empty()) throw std::invalid_argument("delta_nrmse: no baselines");
  for (double b : baseline_scores)
    if (!(b > 0.0)) throw std::invalid_argument("delta_nrmse: baselines must be positive");
  const double best = *std::min_element(baseline_scores.begin(), baseline_scores.end());
  return (best - score) / best;
}

namespace {

// entries indexed as cell-map predictor -> (split, horizon) -> nrmse
using CellMap = std::map<std::string, std::map<std::pair<int, int>, double>>;

CellMap cell_map(const ScoreReport& report) {
  CellMap cells;
  for (const auto& e : report.entries) cells[e.predictor][{e.split, e.horizon}] = e.nrmse;
  return cells;
}

std::set<std::pair<int, int>> full_cell_set(const CellMap& cells) {
  std::set<std::pair<int, int>> all;
  for (const auto& [f, m] : cells)
    for (const auto& [cell, v] : m) all.insert(cell);
  for (const auto& [f, m] : cells)
    if (m.size() != all.size())
      throw std::invalid_argument("degradation: predictor '" + f + "' is missing cells");
  return all;
}

}  // namespace

double nrmse_degradation(const ScoreReport& report, const std::string& predictor) {
  const CellMap cells = cell_map(report);
  const auto it = cells.find(predictor);
  if (it == cells.end()) throw std::invalid_argument("degradation: unknown predictor " + predictor);
  const auto all = full_cell_set(cells);
  if (all.empty()) throw std::invalid_argument("degradation: empty report");

  double total = 0.0;
  for (const auto& cell : all) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [f, m] : cells) best = std::min(best, m.at(cell));
    total += it->second.at(cell) - best;
  }
  return total / static_cast<double>(all.size());
}

std::map<std::string, double> rank_by_degradation(const std::map<std::string, double>& degradation) {
  std::vector<std::pair<std::string, double>> items(degradation.begin(), degradation.end());
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  std::map<std::string, double> ranks;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j < items.size() && items[j].second == items[i].second) ++j;
    const double shared = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t r = i; r < j; ++r) ranks[items[r].first] = shared;
    i = j;
  }
  return ranks;
}

void finalize_report(ScoreReport& report) {
  if (report.entries.empty()) throw std::invalid_argument("finalize_report: no entries");
  const CellMap cells = cell_map(report);
  full_cell_set(cells);

  std::set<int> splits, horizons;
  for (const auto& e : report.entries) {
    splits.insert(e.split);
    horizons.insert(e.horizon);
  }
  report.split_count = static_cast<int>(splits.size());
  report.horizon_count = std::max(report.horizon_count, *horizons.rbegin());

  // Split-averaged NRMSE per (predictor, horizon).
  const auto mean_over_splits = [&](const std::string& f, int h) {
    double sum = 0.0;
    int count = 0;
    for (int s : splits) {
      sum += cells.at(f).at({s, h});
      ++count;
    }
    return sum / static_cast<double>(count);
  };

  report.delta_nrmse.clear();
  for (const auto& [f, m] : cells) {
    if (std::find(report.baselines.begin(), report.baselines.end(), f) != report.baselines.end())
      continue;
    std::vector<double> curve;
    for (int h : horizons) {
      std::vector<double> base;
      for (const auto& b : report.baselines) {
        if (cells.find(b) == cells.end())
          throw std::invalid_argument("finalize_report: baseline '" + b + "' has no entries");
        base.push_back(mean_over_splits(b, h));
      }
      curve.push_back(base.empty() ? 0.0 : delta_nrmse(mean_over_splits(f, h), base));
    }
    report.delta_nrmse[f] = std::move(curve);
  }

  report.degradation.clear();
  for (const auto& [f, m] : cells) report.degradation[f] = nrmse_degradation(report, f);
  report.average_rank = rank_by_degradation(report.degradation);
}

std::string score_report_csv(const ScoreReport& report) {
  std::string out = "predictor,split,horizon_minutes,nrmse\n";
  char buf[96];
  for (const auto& e : report.entries) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.12g\n", e.predictor.c_str(), e.split, e.horizon * 10, e.nrmse);
    out += buf;
  }
  return out;
}

std::string score_report_aggregates(const ScoreReport& report) {
  nlohmann::ordered_json doc;
  doc["z_bar"] = report.z_bar;
  doc["splits"] = report.split_count;
  doc["horizons"] = report.horizon_count;
  doc["baselines"] = report.baselines;
  std::set<int> horizons;
  for (const auto& e : report.entries) horizons.insert(e.horizon);
  std::vector<int> horizon_minutes;
  for (int h : horizons) horizon_minutes.push_back(h * 10);
  doc["horizon_minutes"] = horizon_minutes;  // index order of the delta curves
  doc["delta_nrmse"] = nlohmann::ordered_json::object();
  for (const auto& [f, curve] : report.delta_nrmse) doc["delta_nrmse"][f] = curve;
  doc["degradation"] = nlohmann::ordered_json::object();
  for (const auto& [f, d] : report.degradation) doc["degradation"][f] = d;
  doc["average_rank"] = nlohmann::ordered_json::object();
  for (const auto& [f, r] : report.average_rank) doc["average_rank"][f] = r;
  return doc.dump(2) + "\n";
}

}  // namespace windcast
