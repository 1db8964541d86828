#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "windcast/dataset.hpp"

namespace windcast {

struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  std::vector<Eigen::Index> selected;  // stepwise only: selection order
  double lambda = std::numeric_limits<double>::quiet_NaN();  // LASSO only
  bool converged = true;
  int iterations = 0;
};

/// Least squares with unpenalized intercept, solved through the augmented
/// normal equations with an eigenvalue-thresholded pseudo-inverse so that
/// rank-deficient designs are handled.
LinearModel ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Greedy forward selection. Each step adds the column whose OLS fit scores
/// best on (x_score, y_score); ties go to the lowest column index. The
/// returned model is the candidate count with the best score; `selected`
/// holds the selection order up to that count.
LinearModel forward_stepwise_fit(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                                 const Eigen::MatrixXd& x_score, const Eigen::VectorXd& y_score,
                                 const std::vector<int>& candidate_counts);

/// Cyclic coordinate descent on (1/n)*sum((w.x + b - y)^2) + lambda*|w|_1.
/// Stops when the largest coefficient change in a sweep drops below tol;
/// if max_iter sweeps pass first the model is returned with converged=false.
LinearModel lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                      double tol = 1e-6, int max_iter = 10000);

/// Smallest lambda for which the LASSO solution is identically zero.
double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

Eigen::VectorXd linear_predict(const LinearModel& model, const Eigen::MatrixXd& x);

struct VariableScore {
  std::string variable;
  int horizon = 1;  // in steps; serialized as minutes
  double score = 0.0;
};

struct VariableScoreTable {
  std::vector<VariableScore> rows;
  int splits_averaged = 1;
  int farms_averaged = 1;
};

/// Per-channel LASSO importance for one horizon: within each model, |w| is
/// normalized by the largest |w| (an all-zero model contributes zeros), the
/// normalized values are summed over each channel's time offsets, and the
/// result is averaged over the per-split models.
VariableScoreTable lasso_variable_scores(const std::vector<LinearModel>& per_split_models,
                                         const std::vector<FeatureLabel>& labels, int horizon);

VariableScoreTable average_over_farms(const std::vector<VariableScoreTable>& farm_tables);

/// Channel names ranked by mean score across horizons, truncated to k.
std::vector<std::string> retain_top_k(const VariableScoreTable& table, int k);

std::string variable_scores_csv(const VariableScoreTable& table);

}  // namespace windcast
