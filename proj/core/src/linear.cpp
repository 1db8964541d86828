#include "windcast/linear.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "spectral.hpp"

namespace windcast {

namespace {

// Minimum-norm normal-equation solve; rank deficiency handled by truncation.
Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& g, const Eigen::VectorXd& b) {
  return detail::pinv_solve_sym(g, b, 1e-12);
}

void require_finite(const Eigen::MatrixXd& x, const char* what) {
  if (!x.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite values");
}

// Squared residual norm of the augmented model [w; b] from cached Gram blocks:
// |A u - y|^2 = u'Gu - 2 u'b + y'y with A = [X 1].
double residual_sq(const Eigen::MatrixXd& gram, const Eigen::VectorXd& aty, double yty,
                   const Eigen::VectorXd& u) {
  const double r = u.dot(gram * u) - 2.0 * u.dot(aty) + yty;
  return std::max(r, 0.0);
}

struct AugGram {
  Eigen::MatrixXd gram;  // (q+1) x (q+1), intercept column last
  Eigen::VectorXd aty;
  double yty = 0.0;
  double n = 0.0;
};

AugGram make_aug_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index q = x.cols();
  AugGram g;
  g.n = static_cast<double>(x.rows());
  g.gram.resize(q + 1, q + 1);
  g.gram.topLeftCorner(q, q).noalias() = x.transpose() * x;
  g.gram.topRightCorner(q, 1) = x.colwise().sum().transpose();
  g.gram.bottomLeftCorner(1, q) = x.colwise().sum();
  g.gram(q, q) = g.n;
  g.aty.resize(q + 1);
  g.aty.head(q).noalias() = x.transpose() * y;
  g.aty[q] = y.sum();
  g.yty = y.squaredNorm();
  return g;
}

}  // namespace

LinearModel ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size() || x.rows() < 1) throw std::invalid_argument("ols_fit: shape mismatch");
  require_finite(x, "ols_fit");
  require_finite(y, "ols_fit");
  const AugGram g = make_aug_gram(x, y);
  const Eigen::VectorXd u = pinv_solve(g.gram, g.aty);
  LinearModel model;
  model.weights = u.head(x.cols());
  model.intercept = u[x.cols()];
  return model;
}

LinearModel forward_stepwise_fit(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                                 const Eigen::MatrixXd& x_score, const Eigen::VectorXd& y_score,
                                 const std::vector<int>& candidate_counts) {
  const Eigen::Index q = x_train.cols();
  if (x_train.rows() != y_train.size() || x_score.rows() != y_score.size() || x_score.cols() != q)
    throw std::invalid_argument("forward_stepwise_fit: shape mismatch");
  if (candidate_counts.empty()) throw std::invalid_argument("forward_stepwise_fit: empty candidate_counts");
  for (int c : candidate_counts)
    if (c < 1 || c > q) throw std::invalid_argument("forward_stepwise_fit: candidate count outside [1, q]");
  require_finite(x_train, "forward_stepwise_fit");
  require_finite(y_train, "forward_stepwise_fit");
  require_finite(x_score, "forward_stepwise_fit");
  require_finite(y_score, "forward_stepwise_fit");

  const int max_count = *std::max_element(candidate_counts.begin(), candidate_counts.end());
  const AugGram gt = make_aug_gram(x_train, y_train);
  const AugGram gs = make_aug_gram(x_score, y_score);

  // Gram sub-blocks for a candidate set; intercept slot kept last throughout.
  const auto sub_solve = [&](const std::vector<Eigen::Index>& cols) {
    const auto k = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd gsub(k + 1, k + 1);
    Eigen::VectorXd bsub(k + 1);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) gsub(a, b) = gt.gram(cols[a], cols[b]);
      gsub(a, k) = gt.gram(cols[a], q);
      gsub(k, a) = gt.gram(q, cols[a]);
      bsub[a] = gt.aty[cols[a]];
    }
    gsub(k, k) = gt.gram(q, q);
    bsub[k] = gt.aty[q];
    return pinv_solve(gsub, bsub);
  };
  const auto score_of = [&](const std::vector<Eigen::Index>& cols, const Eigen::VectorXd& u) {
    Eigen::MatrixXd gsub(cols.size() + 1, cols.size() + 1);
    Eigen::VectorXd bsub(cols.size() + 1);
    const auto k = static_cast<Eigen::Index>(cols.size());
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) gsub(a, b) = gs.gram(cols[a], cols[b]);
      gsub(a, k) = gs.gram(cols[a], q);
      gsub(k, a) = gs.gram(q, cols[a]);
      bsub[a] = gs.aty[cols[a]];
    }
    gsub(k, k) = gs.gram(q, q);
    bsub[k] = gs.aty[q];
    return residual_sq(gsub, bsub, gs.yty, u);
  };

  std::vector<Eigen::Index> order;
  std::vector<double> order_scores;
  std::vector<bool> used(static_cast<std::size_t>(q), false);
  std::vector<Eigen::Index> trial;
  for (int step = 0; step < max_count; ++step) {
    Eigen::Index best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < q; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      trial = order;
      trial.push_back(j);
      const Eigen::VectorXd u = sub_solve(trial);
      const double sc = score_of(trial, u);
      if (sc < best_score) {  // strict: ties keep the lowest column index
        best_score = sc;
        best = j;
      }
    }
    if (best < 0)  // all candidates scored NaN; fall back to the lowest free index
      for (Eigen::Index j = 0; j < q && best < 0; ++j)
        if (!used[static_cast<std::size_t>(j)]) best = j;
    used[static_cast<std::size_t>(best)] = true;
    order.push_back(best);
    order_scores.push_back(best_score);
  }

  int best_count = candidate_counts.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (int c : candidate_counts) {
    const double sc = order_scores[static_cast<std::size_t>(c - 1)];
    if (sc < best_score) {
      best_score = sc;
      best_count = c;
    }
  }

  std::vector<Eigen::Index> chosen(order.begin(), order.begin() + best_count);
  const Eigen::VectorXd u = sub_solve(chosen);
  LinearModel model;
  model.weights = Eigen::VectorXd::Zero(q);
  for (std::size_t i = 0; i < chosen.size(); ++i) model.weights[chosen[i]] = u[static_cast<Eigen::Index>(i)];
  model.intercept = u[static_cast<Eigen::Index>(chosen.size())];
  model.selected = std::move(chosen);
  return model;
}

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size() || x.rows() < 1) throw std::invalid_argument("lasso_lambda_max: shape mismatch");
  // Mirrors the first coordinate sweep of lasso_fit bit for bit (same dot
  // kernel, same scaling), so a fit at exactly this lambda stays at zero.
  Eigen::VectorXd centered = y;
  centered.array() -= y.mean();
  const double inv_n2 = 2.0 / static_cast<double>(x.rows());
  double lam = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    lam = std::max(lam, std::abs(inv_n2 * x.col(j).dot(centered)));
  return lam;
}

LinearModel lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                      double tol, int max_iter) {
  if (x.rows() != y.size() || x.rows() < 1) throw std::invalid_argument("lasso_fit: shape mismatch");
  if (!(lambda > 0.0)) throw std::invalid_argument("lasso_fit: lambda must be positive");
  if (!(tol > 0.0) || max_iter < 1) throw std::invalid_argument("lasso_fit: bad tolerance settings");
  require_finite(x, "lasso_fit");
  require_finite(y, "lasso_fit");

  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  const double inv_n2 = 2.0 / static_cast<double>(n);
  const Eigen::VectorXd a = x.colwise().squaredNorm() * inv_n2;  // curvature per coordinate

  LinearModel model;
  model.lambda = lambda;
  model.weights = Eigen::VectorXd::Zero(q);
  model.intercept = 0.0;
  Eigen::VectorXd resid = y;  // y - b - Xw

  int sweep = 0;
  for (; sweep < max_iter; ++sweep) {
    double max_delta = 0.0;

    const double db = resid.mean();
    model.intercept += db;
    resid.array() -= db;
    max_delta = std::max(max_delta, std::abs(db));

    for (Eigen::Index j = 0; j < q; ++j) {
      if (a[j] == 0.0) continue;
      const double w_old = model.weights[j];
      const double c = inv_n2 * x.col(j).dot(resid) + a[j] * w_old;
      const double w_new = std::copysign(std::max(std::abs(c) - lambda, 0.0), c) / a[j];
      if (w_new != w_old) {
        resid.noalias() += x.col(j) * (w_old - w_new);
        model.weights[j] = w_new;
        max_delta = std::max(max_delta, std::abs(w_new - w_old));
      }
    }

    if (max_delta < tol) {
      model.converged = true;
      model.iterations = sweep + 1;
      return model;
    }
  }
  model.converged = false;
  model.iterations = sweep;
  return model;
}

Eigen::VectorXd linear_predict(const LinearModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.weights.size())
    throw std::invalid_argument("linear_predict: feature count differs from training");
  return (x * model.weights).array() + model.intercept;
}

VariableScoreTable lasso_variable_scores(const std::vector<LinearModel>& per_split_models,
                                         const std::vector<FeatureLabel>& labels, int horizon) {
  if (per_split_models.empty()) throw std::invalid_argument("lasso_variable_scores: no models");
  const auto q = static_cast<Eigen::Index>(labels.size());
  for (const auto& m : per_split_models)
    if (m.weights.size() != q)
      throw std::invalid_argument("lasso_variable_scores: model/label dimension mismatch");

  std::vector<std::string> channel_order;
  std::map<std::string, double> totals;
  for (const auto& lab : labels)
    if (totals.emplace(lab.channel, 0.0).second) channel_order.push_back(lab.channel);

  for (const auto& m : per_split_models) {
    const double peak = m.weights.cwiseAbs().maxCoeff();
    if (peak == 0.0) continue;
    for (Eigen::Index j = 0; j < q; ++j)
      totals[labels[static_cast<std::size_t>(j)].channel] += std::abs(m.weights[j]) / peak;
  }

  VariableScoreTable table;
  table.splits_averaged = static_cast<int>(per_split_models.size());
  const double inv = 1.0 / static_cast<double>(per_split_models.size());
  for (const auto& name : channel_order)
    table.rows.push_back(VariableScore{name, horizon, totals[name] * inv});
  return table;
}

VariableScoreTable average_over_farms(const std::vector<VariableScoreTable>& farm_tables) {
  if (farm_tables.empty()) throw std::invalid_argument("average_over_farms: no tables");
  const auto& first = farm_tables.front();
  for (const auto& t : farm_tables) {
    if (t.rows.size() != first.rows.size()) throw std::invalid_argument("average_over_farms: table shape mismatch");
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      if (t.rows[i].variable != first.rows[i].variable || t.rows[i].horizon != first.rows[i].horizon)
        throw std::invalid_argument("average_over_farms: row labels differ across farms");
  }
  VariableScoreTable out = first;
  out.farms_averaged = static_cast<int>(farm_tables.size());
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    double sum = 0.0;
    for (const auto& t : farm_tables) sum += t.rows[i].score;
    out.rows[i].score = sum / static_cast<double>(farm_tables.size());
  }
  return out;
}

std::vector<std::string> retain_top_k(const VariableScoreTable& table, int k) {
  if (k < 1) throw std::invalid_argument("retain_top_k: k must be >= 1");
  std::vector<std::string> order;
  std::map<std::string, double> sum;
  std::map<std::string, int> count;
  for (const auto& r : table.rows) {
    if (sum.emplace(r.variable, 0.0).second) order.push_back(r.variable);
    sum[r.variable] += r.score;
    count[r.variable] += 1;
  }
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    return sum[a] / count[a] > sum[b] / count[b];
  });
  if (static_cast<std::size_t>(k) < order.size()) order.resize(static_cast<std::size_t>(k));
  return order;
}

std::string variable_scores_csv(const VariableScoreTable& table) {
  std::string out = "variable,horizon_minutes,score\n";
  char buf[64];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof(buf), "%.12g", r.score);
    out += r.variable + "," + std::to_string(r.horizon * 10) + "," + buf + "\n";
  }
  return out;
}

}  // namespace windcast
