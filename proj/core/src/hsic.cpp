#include "windcast/hsic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "spectral.hpp"
#include "windcast/kernel.hpp"
#include "windcast/random.hpp"

namespace windcast {

namespace {

constexpr double kEigTol = 1e-10;

double resolve_gamma(double configured, Eigen::Index dims) {
  if (configured > 0.0) return configured;
  if (dims < 1) throw std::invalid_argument("hsic: matrix must have at least one column");
  return 1.0 / (2.0 * static_cast<double>(dims));
}

// Centered Nystrom feature map H Knp Kpp^{-1/2}.
Eigen::MatrixXd feature_map(const Eigen::MatrixXd& m, double gamma, std::ptrdiff_t p, Rng& rng) {
  const KernelSpec spec{gamma};
  const auto indices = sample_without_replacement(m.rows(), p, rng);
  Eigen::MatrixXd anchors(p, m.cols());
  for (std::ptrdiff_t i = 0; i < p; ++i) anchors.row(i) = m.row(indices[static_cast<std::size_t>(i)]);
  Eigen::MatrixXd knp = gaussian_gram(m, anchors, spec);
  knp.rowwise() -= knp.colwise().mean();  // H applied on the left
  return knp * detail::inv_sqrt_sym(gaussian_gram(anchors, anchors, spec), kEigTol);
}

Eigen::MatrixXd keep_columns(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = x.col(cols[i]);
  return out;
}

void check_groups(const std::vector<VariableGroup>& groups, Eigen::Index q) {
  std::set<Eigen::Index> seen;
  for (const auto& g : groups) {
    if (g.columns.empty()) throw std::invalid_argument("bahsic: empty variable group " + g.name);
    for (auto c : g.columns) {
      if (c < 0 || c >= q) throw std::invalid_argument("bahsic: column index out of range in " + g.name);
      if (!seen.insert(c).second) throw std::invalid_argument("bahsic: column appears in two groups");
    }
  }
}

}  // namespace

double hsic_exact(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const HsicConfig& config) {
  const Eigen::Index n = x.rows();
  if (y.rows() != n) throw std::invalid_argument("hsic_exact: row counts differ");
  if (n < 2) throw std::invalid_argument("hsic_exact: need at least two samples");

  const Eigen::MatrixXd k = gaussian_gram(x, x, KernelSpec{resolve_gamma(config.gamma_x, x.cols())});
  const Eigen::MatrixXd g = gaussian_gram(y, y, KernelSpec{resolve_gamma(config.gamma_y, y.cols())});

  // Tr(K H G H) = sum of (HKH) .* G by symmetry; double-center K in place.
  Eigen::MatrixXd kc = k;
  const Eigen::VectorXd row_mean = kc.rowwise().mean();
  kc.colwise() -= row_mean;
  kc.rowwise() -= kc.colwise().mean();
  return kc.cwiseProduct(g).sum() / (static_cast<double>(n) * static_cast<double>(n));
}

double nystrom_hsic(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const HsicConfig& config) {
  const Eigen::Index n = x.rows();
  if (y.rows() != n) throw std::invalid_argument("nystrom_hsic: row counts differ");
  if (n < 2) throw std::invalid_argument("nystrom_hsic: need at least two samples");
  if (config.p < 1 || config.p_prime < 1) throw std::invalid_argument("nystrom_hsic: anchor counts must be >= 1");
  if (config.p > n || config.p_prime > n)
    throw std::invalid_argument("nystrom_hsic: anchor count exceeds the sample count");

  const auto p = config.p;
  const auto p_prime = config.p_prime;
  Rng rng(config.seed);
  const Eigen::MatrixXd phi = feature_map(x, resolve_gamma(config.gamma_x, x.cols()), p, rng);
  const Eigen::MatrixXd psi = feature_map(y, resolve_gamma(config.gamma_y, y.cols()), p_prime, rng);
  return (phi.transpose() * psi / static_cast<double>(n)).squaredNorm();
}

EliminationTrace bahsic_rank(const Eigen::MatrixXd& x, const std::vector<VariableGroup>& groups,
                             const Eigen::MatrixXd& y, const HsicConfig& base_config,
                             double elimination_fraction, int stop_at) {
  check_groups(groups, x.cols());
  // The search loop tolerates anchor budgets above the data size; the raw
  // estimator does not, so clamp once here.
  HsicConfig config = base_config;
  config.p = std::min<std::ptrdiff_t>(config.p, x.rows());
  config.p_prime = std::min<std::ptrdiff_t>(config.p_prime, x.rows());
  if (!(elimination_fraction > 0.0) || !(elimination_fraction < 1.0))
    throw std::invalid_argument("bahsic_rank: elimination_fraction must lie in (0,1)");
  if (stop_at < 1) throw std::invalid_argument("bahsic_rank: stop_at must be >= 1");
  if (static_cast<std::size_t>(stop_at) >= groups.size())
    throw std::invalid_argument("bahsic_rank: stop_at must be below the variable count");

  // Leave-out HSIC per remaining variable; the anchor seed is shared within a
  // round so candidates see the same row sample.
  const auto leave_out = [&](const std::vector<std::size_t>& remaining) {
    std::vector<double> values(remaining.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      std::vector<Eigen::Index> cols;
      for (std::size_t r : remaining)
        if (r != remaining[i])
          cols.insert(cols.end(), groups[r].columns.begin(), groups[r].columns.end());
      std::sort(cols.begin(), cols.end());
      // Leaving out the sole survivor leaves nothing: zero dependence.
      values[i] = cols.empty() ? 0.0 : nystrom_hsic(keep_columns(x, cols), y, config);
    }
    return values;
  };

  std::vector<std::size_t> remaining(groups.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

  EliminationTrace trace;
  while (remaining.size() > static_cast<std::size_t>(stop_at)) {
    const auto values = leave_out(remaining);
    std::vector<std::size_t> order(remaining.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    auto n_remove = static_cast<std::size_t>(
        std::ceil(elimination_fraction * static_cast<double>(remaining.size())));
    n_remove = std::max<std::size_t>(n_remove, 1);
    n_remove = std::min(n_remove, remaining.size() - static_cast<std::size_t>(stop_at));

    EliminationRound round;
    std::set<std::size_t> removed;
    for (std::size_t i = 0; i < n_remove; ++i) {
      round.eliminated.push_back(groups[remaining[order[i]]].name);
      removed.insert(remaining[order[i]]);
    }
    std::vector<std::size_t> next;
    for (std::size_t r : remaining)
      if (removed.count(r) == 0) next.push_back(r);
    remaining = std::move(next);

    std::vector<Eigen::Index> cols;
    for (std::size_t r : remaining) cols.insert(cols.end(), groups[r].columns.begin(), groups[r].columns.end());
    std::sort(cols.begin(), cols.end());
    round.hsic_after = nystrom_hsic(keep_columns(x, cols), y, config);
    trace.rounds.push_back(std::move(round));
  }

  for (std::size_t r : remaining) trace.survivors.push_back(groups[r].name);

  for (const auto& round : trace.rounds)
    trace.final_ranking.insert(trace.final_ranking.end(), round.eliminated.begin(), round.eliminated.end());
  // Survivors ranked by their final-state leave-out HSIC: the variable whose
  // absence costs most goes last (most important).
  const auto final_values = leave_out(remaining);
  std::vector<std::size_t> order(remaining.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return final_values[a] > final_values[b]; });
  for (std::size_t i : order) trace.final_ranking.push_back(groups[remaining[i]].name);
  return trace;
}

std::map<std::string, double> hsic_importance(const Eigen::MatrixXd& x,
                                              const std::vector<VariableGroup>& variables,
                                              const Eigen::MatrixXd& y, const HsicConfig& base_config) {
  if (variables.empty()) throw std::invalid_argument("hsic_importance: empty variable set");
  check_groups(variables, x.cols());
  // A sole variable has no peers to normalize against; its absence empties
  // the set, so it carries the full score.
  if (variables.size() == 1) return {{variables[0].name, 1.0}};
  HsicConfig config = base_config;
  config.p = std::min<std::ptrdiff_t>(config.p, x.rows());
  config.p_prime = std::min<std::ptrdiff_t>(config.p_prime, x.rows());

  std::vector<double> values(variables.size());
  for (std::size_t i = 0; i < variables.size(); ++i) {
    std::vector<Eigen::Index> cols;
    for (std::size_t r = 0; r < variables.size(); ++r)
      if (r != i) cols.insert(cols.end(), variables[r].columns.begin(), variables[r].columns.end());
    if (cols.empty()) throw std::invalid_argument("hsic_importance: need at least two variables");
    std::sort(cols.begin(), cols.end());
    values[i] = nystrom_hsic(keep_columns(x, cols), y, config);
  }
  const double peak = *std::max_element(values.begin(), values.end());
  std::map<std::string, double> scores;
  for (std::size_t i = 0; i < variables.size(); ++i)
    scores[variables[i].name] = peak > 0.0 ? 1.0 - values[i] / peak : 0.0;
  return scores;
}

std::map<std::string, double> average_scores(const std::vector<std::map<std::string, double>>& tables) {
  if (tables.empty()) throw std::invalid_argument("average_scores: no tables");
  std::map<std::string, double> out = tables.front();
  for (std::size_t i = 1; i < tables.size(); ++i) {
    if (tables[i].size() != out.size()) throw std::invalid_argument("average_scores: key sets differ");
    for (const auto& [k, v] : tables[i]) {
      const auto it = out.find(k);
      if (it == out.end()) throw std::invalid_argument("average_scores: key sets differ");
      it->second += v;
    }
  }
  for (auto& [k, v] : out) v /= static_cast<double>(tables.size());
  return out;
}

std::string elimination_csv(const EliminationTrace& trace,
                            const std::map<std::string, double>& importance) {
  std::map<std::string, std::pair<int, double>> eliminated_at;
  for (std::size_t r = 0; r < trace.rounds.size(); ++r)
    for (const auto& name : trace.rounds[r].eliminated)
      eliminated_at[name] = {static_cast<int>(r) + 1, trace.rounds[r].hsic_after};

  std::string out = "variable,round,hsic,score\n";
  char buf[64];
  for (const auto& name : trace.final_ranking) {
    out += name + ",";
    const auto it = eliminated_at.find(name);
    if (it != eliminated_at.end()) {
      std::snprintf(buf, sizeof(buf), "%d,%.12g", it->second.first, it->second.second);
      out += buf;
    } else {
      out += ",";
    }
    out += ",";
    const auto sc = importance.find(name);
    if (sc != importance.end()) {
      std::snprintf(buf, sizeof(buf), "%.12g", sc->second);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace windcast
