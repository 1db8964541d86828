#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "windcast/dataset.hpp"
#include "windcast/evaluation.hpp"
#include "windcast/synthetic.hpp"
#include "windcast/time_series.hpp"

namespace windcast {

/// count log-uniformly spaced values with inclusive endpoints.
std::vector<double> geometric_grid(double lo, double hi, int count);

struct DataConfig {
  std::optional<SyntheticFarmSpec> synthetic;
  std::vector<std::string> turbine_csv;  // averaged when several
  std::string nwp_csv;                   // optional; resampled and merged
  std::map<std::string, ChannelRole> roles;
  std::vector<std::string> direction_channels;  // sin/cos-encoded after load
};

struct PredictorConfig {
  bool ols = false;
  bool stepwise = false;
  std::vector<int> stepwise_counts = {5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 20};
  bool lasso = false;
  std::vector<double> lasso_grid = geometric_grid(1e-5, 1.0, 30);
  double lasso_tol = 1e-6;
  int lasso_max_iter = 10000;
  bool nystrom_krr = false;
  std::vector<double> krr_gamma_grid = geometric_grid(1e-6, 1e-3, 30);
  std::vector<double> krr_lambda_grid = geometric_grid(1e-4, 5.0, 30);
  std::ptrdiff_t krr_anchors = 300;
};

struct SelectionConfig {
  std::string method = "none";  // none | lasso | bahsic
  int top_k = 6;                // lasso retention
  double bahsic_fraction = 0.1;
  int bahsic_stop_at = 5;
  int bahsic_top = 4;  // channels handed to nonlinear predictors
  std::ptrdiff_t bahsic_p = 100;
  std::ptrdiff_t bahsic_p_prime = 100;
};

struct ExperimentConfig {
  DataConfig data;
  WindowSpec window;
  SplitSizes splits;
  std::string task = "speed";  // speed | power
  std::string target_channel = "WS";
  std::string speed_channel = "WS";  // power task: curve input and indirect target
  std::string nwp_baseline_channel = "F1";
  std::string power_mode = "both";  // direct | indirect | both
  int power_curve_k = 250;          // clamped to the train pair count
  std::vector<int> horizons;        // empty = 1..horizon_count
  PredictorConfig predictors;
  SelectionConfig selection;
  std::uint64_t seed = 1;

  void validate() const;
  std::vector<int> horizon_list() const;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Reads a JSON config file; the WINDCAST_SEED environment variable, when
/// set, overrides the config seed before parsing.
ExperimentConfig load_config(const std::string& path);

/// Materializes the configured farm (synthetic, or CSV ingestion with
/// turbine averaging, NWP resampling/merging and direction encoding).
TimeSeriesFrame load_frame(const ExperimentConfig& config);

/// Full protocol: per split and horizon, standardize on train, optionally
/// select variables, fit each grid point on train, choose by validation
/// NRMSE, refit on train+val, score on test against the baselines.
ScoreReport run_experiment(const ExperimentConfig& config);

/// run_experiment that additionally serializes every refit model (with its
/// standardizers and feature channels) into a JSON document.
ScoreReport run_experiment(const ExperimentConfig& config, nlohmann::ordered_json* models_out);

struct SelectionResult {
  ScoreReport report;  // importance tables and fit records only
  nlohmann::ordered_json selected;  // per-split selected channel sets
};

/// Runs only the variable-selection stage.
SelectionResult run_selection(const ExperimentConfig& config);

/// Writes scores.csv, aggregates.json, importance.csv (when selection ran)
/// and powercurve.csv (power runs) into out_dir. Bit-stable per report.
void emit_report(const ScoreReport& report, const std::string& out_dir,
                 bool csv = true, bool json = true);

nlohmann::ordered_json report_to_json(const ScoreReport& report);
ScoreReport report_from_json(const nlohmann::json& doc);

}  // namespace windcast
