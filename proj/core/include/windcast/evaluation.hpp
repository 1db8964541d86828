#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "windcast/hsic.hpp"
#include "windcast/linear.hpp"
#include "windcast/power_curve.hpp"
#include "windcast/time_series.hpp"

namespace windcast {

/// Prediction for t+h is y[t], the last observed target value at the anchor.
Eigen::VectorXd persistence_forecast(const std::vector<double>& y,
                                     const std::vector<std::ptrdiff_t>& anchors, int horizon);

/// Prediction for t+h is the NWP channel value at index t+h; with a curve,
/// the speed forecast is passed through it (indirect power baseline).
Eigen::VectorXd nwp_forecast(const TimeSeriesFrame& frame, const std::string& nwp_channel,
                             const std::vector<std::ptrdiff_t>& anchors, int horizon,
                             const PowerCurve* curve = nullptr);

/// Root-mean-square error divided by z_bar.
double nrmse(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y, double z_bar);

/// (min(baselines) - score) / min(baselines); positive means skill.
double delta_nrmse(double score, const std::vector<double>& baseline_scores);

struct ScoreEntry {
  std::string predictor;
  int split = 0;
  int horizon = 1;
  double nrmse = 0.0;
};

/// Provenance of one fitted statistic; the hygiene assertion is
/// last_observed_index < test_begin.
struct FitRecord {
  std::string object;  // standardizer / selection / hyperparameters / model / power_curve
  std::string predictor;
  int split = 0;
  int horizon = 0;  // 0 when the object is split-wide
  std::ptrdiff_t fit_row_count = 0;
  std::ptrdiff_t last_observed_index = 0;
  std::ptrdiff_t test_begin = 0;
};

struct ScoreReport {
  std::vector<ScoreEntry> entries;
  double z_bar = 1.0;
  int horizon_count = 0;
  int split_count = 0;
  std::vector<std::string> baselines;  // predictor names serving as skill references

  // Aggregates, filled by finalize_report.
  std::map<std::string, std::vector<double>> delta_nrmse;  // per predictor, index h-1
  std::map<std::string, double> degradation;
  std::map<std::string, double> average_rank;

  // Importance tables (populated when selection ran).
  VariableScoreTable lasso_scores;
  std::vector<EliminationTrace> bahsic_traces;  // one per split
  std::map<std::string, double> bahsic_scores;  // split-averaged importance

  std::vector<std::pair<double, double>> power_curve_grid;  // power runs only
  std::vector<FitRecord> fit_records;
};

/// Average excess NRMSE of f0 over the cell-wise best predictor, across all
/// (split, horizon) cells. Throws if any predictor misses a cell.
double nrmse_degradation(const ScoreReport& report, const std::string& predictor);

/// Ranks predictors by degradation, ties sharing the mean rank.
std::map<std::string, double> rank_by_degradation(const std::map<std::string, double>& degradation);

/// Computes delta-NRMSE curves (split-averaged), degradation, and ranks.
void finalize_report(ScoreReport& report);

/// Long-format CSV: predictor,split,horizon_minutes,nrmse.
std::string score_report_csv(const ScoreReport& report);

/// JSON aggregate document (delta curves, degradation, ranks, z_bar).
std::string score_report_aggregates(const ScoreReport& report);

}  // namespace windcast
