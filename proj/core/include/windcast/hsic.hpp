#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace windcast {

/// Gammas at or below 0 mean "use the 1/(2d) heuristic on the matrix being
/// evaluated", which tracks the shrinking dimension during elimination.
struct HsicConfig {
  double gamma_x = 0.0;
  double gamma_y = 0.0;
  std::ptrdiff_t p = 100;        // input anchors
  std::ptrdiff_t p_prime = 100;  // output anchors
  std::uint64_t seed = 0;
};

/// Biased estimator (1/n^2) Tr(K H G H) with H = I - (1/n) 1 1'.
double hsic_exact(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const HsicConfig& config);

/// Nystrom estimator |(1/n) Phi' Psi|_F^2 with centered feature maps
/// Phi = H Knp Kpp^{-1/2}; anchor sets for x and y drawn independently
/// without replacement from config.seed. Anchor counts above n are an error
/// here; the elimination drivers below clamp their budgets instead.
double nystrom_hsic(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const HsicConfig& config);

/// One selectable variable: a named group of design-matrix columns
/// (a channel together with all of its time offsets).
struct VariableGroup {
  std::string name;
  std::vector<Eigen::Index> columns;
};

struct EliminationRound {
  std::vector<std::string> eliminated;  // least important first
  double hsic_after = 0.0;              // HSIC of the surviving set
};

struct EliminationTrace {
  std::vector<EliminationRound> rounds;
  std::vector<std::string> survivors;
  std::vector<std::string> final_ranking;  // least to most important
};

/// Backward elimination: each round drops the ceil(fraction * remaining)
/// variables whose removal leaves the highest HSIC (their absence costs
/// least), never dropping below stop_at survivors.
EliminationTrace bahsic_rank(const Eigen::MatrixXd& x, const std::vector<VariableGroup>& groups,
                             const Eigen::MatrixXd& y, const HsicConfig& config,
                             double elimination_fraction = 0.1, int stop_at = 5);

/// Leave-one-out HSIC scores over the retained set, normalized by the
/// largest; score(v) = 1 - normalized leave-out HSIC of v.
std::map<std::string, double> hsic_importance(const Eigen::MatrixXd& x,
                                              const std::vector<VariableGroup>& variables,
                                              const Eigen::MatrixXd& y, const HsicConfig& config);

/// Key-wise mean over per-split score tables.
std::map<std::string, double> average_scores(const std::vector<std::map<std::string, double>>& tables);

/// CSV (variable, round, hsic, score) in final-ranking order. Survivors have
/// empty round/hsic cells; eliminated variables have empty score cells unless
/// present in `importance`.
std::string elimination_csv(const EliminationTrace& trace,
                            const std::map<std::string, double>& importance);

}  // namespace windcast
