#include "windcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "windcast/kernel.hpp"
#include "windcast/random.hpp"
#include "windcast/serialize.hpp"

namespace windcast {

std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("geometric_grid: need 0 < lo < hi");
  if (count < 2) throw std::invalid_argument("geometric_grid: need count >= 2");
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double step = (std::log(hi) - std::log(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + step * i);
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

namespace {

// Stream labels for derive_seed; spacing the raw values through splitmix64
// keeps (split, horizon, purpose) collisions from aliasing each other.
enum SeedPurpose : std::uint64_t {
  kSeedKrrGrid = 1,
  kSeedKrrRefit = 2,
  kSeedBahsic = 3,
};

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t split, std::uint64_t horizon,
                          std::uint64_t purpose) {
  std::uint64_t s = mix64(base);
  s = mix64(s ^ mix64(split + 1));
  s = mix64(s ^ mix64(horizon + 0x100));
  s = mix64(s ^ mix64(purpose + 0x10000));
  return s;
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Half-open row range of a dataset; parts of a split map to contiguous row
// ranges because sample anchors are ascending.
struct RowRange {
  std::ptrdiff_t lo = 0;
  std::ptrdiff_t hi = 0;
  std::ptrdiff_t size() const { return hi - lo; }
  bool empty() const { return hi <= lo; }
};

// Rows whose whole target range [t + h_lo, t + h_hi] lies inside `part`.
// Feature windows may reach back before the part: inputs are past data.
RowRange part_rows(const std::vector<std::ptrdiff_t>& anchors, const IndexRange& part, int h_lo,
                   int h_hi) {
  const auto lo = std::lower_bound(anchors.begin(), anchors.end(), part.begin - h_lo) - anchors.begin();
  const auto hi = std::lower_bound(anchors.begin(), anchors.end(), part.end - h_hi) - anchors.begin();
  return {lo, std::max<std::ptrdiff_t>(lo, hi)};
}

Eigen::MatrixXd take_cols(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(cols[i]);
  return out;
}

std::vector<Eigen::Index> channel_columns(const std::vector<FeatureLabel>& labels,
                                          const std::vector<std::string>& keep) {
  const std::set<std::string> wanted(keep.begin(), keep.end());
  std::vector<Eigen::Index> cols;
  for (std::size_t j = 0; j < labels.size(); ++j)
    if (wanted.count(labels[j].channel)) cols.push_back(static_cast<Eigen::Index>(j));
  if (cols.empty()) throw std::runtime_error("variable selection retained no feature columns");
  return cols;
}

std::vector<VariableGroup> make_groups(const std::vector<FeatureLabel>& labels) {
  std::vector<VariableGroup> groups;
  std::map<std::string, std::size_t> at;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    auto [it, fresh] = at.try_emplace(labels[j].channel, groups.size());
    if (fresh) groups.push_back({labels[j].channel, {}});
    groups[it->second].columns.push_back(static_cast<Eigen::Index>(j));
  }
  return groups;
}

double rmse(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y) {
  if (y_hat.size() != y.size() || y.size() == 0) throw std::invalid_argument("rmse: size mismatch");
  return std::sqrt((y_hat - y).squaredNorm() / static_cast<double>(y.size()));
}

double finite_mean(const std::vector<double>& v) {
  double sum = 0.0;
  std::ptrdiff_t count = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      sum += x;
      ++count;
    }
  if (count == 0) throw std::runtime_error("target channel has no finite values");
  return sum / static_cast<double>(count);
}

Standardizer standardizer_subset(const Standardizer& s, const std::vector<Eigen::Index>& cols) {
  Standardizer out;
  out.fitted_on = s.fitted_on;
  out.mean.resize(static_cast<Eigen::Index>(cols.size()));
  out.std.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.mean[static_cast<Eigen::Index>(i)] = s.mean[cols[i]];
    out.std[static_cast<Eigen::Index>(i)] = s.std[cols[i]];
  }
  return out;
}

std::vector<double> parse_grid(const nlohmann::json& j, const char* what) {
  if (j.is_array()) {
    auto grid = j.get<std::vector<double>>();
    if (grid.empty()) throw std::invalid_argument(std::string(what) + ": empty grid");
    return grid;
  }
  if (j.is_object())
    return geometric_grid(j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("count").get<int>());
  throw std::invalid_argument(std::string(what) + ": expected an array or {lo, hi, count}");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::ordered_json label_to_json(const FeatureLabel& label) {
  nlohmann::ordered_json j;
  j["channel"] = label.channel;
  j["offset"] = label.offset;
  j["base"] = label.base == OffsetBase::Anchor ? "anchor" : "horizon";
  j["role"] = role_name(label.role);
  return j;
}

// ---- per-run working state ---------------------------------------------

struct LassoSelection {
  LinearModel chosen;       // best-on-validation model over the lambda grid
  double lambda = 0.0;
  std::vector<std::string> kept;
};

LassoSelection lasso_select(const Eigen::MatrixXd& xs_tr, const Eigen::VectorXd& ys_tr,
                            const Eigen::MatrixXd& xs_va, const Eigen::VectorXd& ys_va,
                            const std::vector<FeatureLabel>& labels, int horizon,
                            const PredictorConfig& pc, int top_k) {
  LassoSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : pc.lasso_grid) {
    LinearModel m = lasso_fit(xs_tr, ys_tr, lambda, pc.lasso_tol, pc.lasso_max_iter);
    const double err = rmse(linear_predict(m, xs_va), ys_va);
    if (err < best) {
      best = err;
      sel.chosen = std::move(m);
      sel.lambda = lambda;
    }
  }
  const auto table = lasso_variable_scores({sel.chosen}, labels, horizon);
  sel.kept = retain_top_k(table, top_k);
  return sel;
}

struct KrrChoice {
  double gamma = 0.0;
  double lambda = 0.0;
};

// Grid search with the Gram blocks cached per gamma; the anchor sample is
// shared across the whole grid so candidates differ only in (gamma, lambda).
KrrChoice krr_grid_search(const Eigen::MatrixXd& xs_tr, const Eigen::VectorXd& ys_tr,
                          const Eigen::MatrixXd& xs_va, const Eigen::VectorXd& ys_va,
                          const PredictorConfig& pc, std::uint64_t seed) {
  const std::ptrdiff_t n = xs_tr.rows();
  const std::ptrdiff_t p = std::min<std::ptrdiff_t>(pc.krr_anchors, n);
  Rng rng(seed);
  const auto picked = sample_without_replacement(n, p, rng);
  Eigen::MatrixXd anchors(p, xs_tr.cols());
  for (std::ptrdiff_t i = 0; i < p; ++i) anchors.row(i) = xs_tr.row(picked[static_cast<std::size_t>(i)]);

  KrrChoice best{pc.krr_gamma_grid.front(), pc.krr_lambda_grid.front()};
  double best_err = std::numeric_limits<double>::infinity();
  for (double gamma : pc.krr_gamma_grid) {
    const KernelSpec spec{gamma};
    const Eigen::MatrixXd knp = gaussian_gram(xs_tr, anchors, spec);
    const Eigen::MatrixXd c = knp.transpose() * knp;
    const Eigen::MatrixXd b = knp.transpose() * ys_tr;
    const Eigen::MatrixXd kpp = gaussian_gram(anchors, anchors, spec);
    const Eigen::MatrixXd kvp = gaussian_gram(xs_va, anchors, spec);
    for (double lambda : pc.krr_lambda_grid) {
      const Eigen::VectorXd alpha = nystrom_krr_solve(c, kpp, b, lambda, n);
      const double err = rmse(kvp * alpha, ys_va);
      if (err < best_err) {
        best_err = err;
        best = {gamma, lambda};
      }
    }
  }
  return best;
}

// One regression target within a task. The speed task has a single variant;
// the power task has a direct one (fit on power) and an indirect one (fit on
// speed, mapped through the split's power curve before scoring).
struct Variant {
  std::string suffix;
  Eigen::VectorXd y;   // per-row fit targets in original units
  bool through_curve = false;
  std::uint64_t tag = 0;  // seed-stream offset
};

struct SplitPrep {
  std::optional<PowerCurve> curve;
  // method == bahsic: channels offered to the kernel predictor, per variant tag.
  std::map<std::uint64_t, std::vector<std::string>> krr_channels;
};

}  // namespace

// ---- configuration --------------------------------------------------------

void ExperimentConfig::validate() const {
  window.validate();
  if (task != "speed" && task != "power")
    throw std::invalid_argument("config: task must be 'speed' or 'power'");
  if (target_channel.empty()) throw std::invalid_argument("config: target_channel is empty");
  if (task == "power") {
    if (speed_channel.empty()) throw std::invalid_argument("config: speed_channel is empty");
    if (power_mode != "direct" && power_mode != "indirect" && power_mode != "both")
      throw std::invalid_argument("config: power_mode must be direct, indirect or both");
    if (power_curve_k < 1) throw std::invalid_argument("config: power_curve_k must be >= 1");
  }
  if (splits.n_train < 1 || splits.n_val < 1 || splits.n_test < 1)
    throw std::invalid_argument("config: split sizes must be positive");

  if (data.synthetic) {
    data.synthetic->validate();
    if (!data.turbine_csv.empty())
      throw std::invalid_argument("config: choose either synthetic data or turbine_csv, not both");
  } else {
    if (data.turbine_csv.empty())
      throw std::invalid_argument("config: no data source (synthetic or turbine_csv)");
    if (data.roles.empty())
      throw std::invalid_argument("config: roles are required for CSV ingestion");
  }

  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 1 || horizons[i] > window.horizon_count)
      throw std::invalid_argument("config: horizon out of range");
    if (i > 0 && horizons[i] <= horizons[i - 1])
      throw std::invalid_argument("config: horizons must be strictly increasing");
  }

  const auto& pc = predictors;
  if (pc.stepwise) {
    if (pc.stepwise_counts.empty()) throw std::invalid_argument("config: stepwise_counts is empty");
    for (int c : pc.stepwise_counts)
      if (c < 1) throw std::invalid_argument("config: stepwise counts must be positive");
  }
  if (pc.lasso || selection.method == "lasso") {
    if (pc.lasso_grid.empty()) throw std::invalid_argument("config: lasso_grid is empty");
    for (double l : pc.lasso_grid)
      if (!(l >= 0.0)) throw std::invalid_argument("config: lasso lambdas must be >= 0");
    if (!(pc.lasso_tol > 0.0)) throw std::invalid_argument("config: lasso_tol must be positive");
    if (pc.lasso_max_iter < 1) throw std::invalid_argument("config: lasso_max_iter must be >= 1");
  }
  if (pc.nystrom_krr) {
    if (pc.krr_gamma_grid.empty() || pc.krr_lambda_grid.empty())
      throw std::invalid_argument("config: KRR grids must be non-empty");
    for (double g : pc.krr_gamma_grid)
      if (!(g > 0.0)) throw std::invalid_argument("config: KRR gammas must be positive");
    for (double l : pc.krr_lambda_grid)
      if (!(l >= 0.0)) throw std::invalid_argument("config: KRR lambdas must be >= 0");
    if (pc.krr_anchors < 1) throw std::invalid_argument("config: krr_anchors must be >= 1");
  }

  const auto& sc = selection;
  if (sc.method != "none" && sc.method != "lasso" && sc.method != "bahsic")
    throw std::invalid_argument("config: selection method must be none, lasso or bahsic");
  if (sc.method == "lasso" && sc.top_k < 1)
    throw std::invalid_argument("config: selection top_k must be >= 1");
  if (sc.method == "bahsic") {
    if (!(sc.bahsic_fraction > 0.0 && sc.bahsic_fraction < 1.0))
      throw std::invalid_argument("config: bahsic_fraction must lie in (0, 1)");
    if (sc.bahsic_stop_at < 1) throw std::invalid_argument("config: bahsic_stop_at must be >= 1");
    if (sc.bahsic_top < 1 || sc.bahsic_top > sc.bahsic_stop_at)
      throw std::invalid_argument("config: bahsic_top must lie in [1, bahsic_stop_at]");
    if (sc.bahsic_p < 1 || sc.bahsic_p_prime < 1)
      throw std::invalid_argument("config: bahsic anchor counts must be >= 1");
  }
}

std::vector<int> ExperimentConfig::horizon_list() const {
  if (!horizons.empty()) return horizons;
  std::vector<int> all(static_cast<std::size_t>(window.horizon_count));
  std::iota(all.begin(), all.end(), 1);
  return all;
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  ExperimentConfig c;
  c.seed = doc.value("seed", c.seed);
  c.task = doc.value("task", c.task);
  c.target_channel = doc.value("target_channel", c.target_channel);
  c.speed_channel = doc.value("speed_channel", c.speed_channel);
  c.nwp_baseline_channel = doc.value("nwp_baseline_channel", c.nwp_baseline_channel);
  c.power_mode = doc.value("power_mode", c.power_mode);
  c.power_curve_k = doc.value("power_curve_k", c.power_curve_k);
  if (doc.contains("horizons")) c.horizons = doc.at("horizons").get<std::vector<int>>();

  if (doc.contains("window")) {
    const auto& w = doc.at("window");
    c.window.past_len = w.value("past_len", c.window.past_len);
    c.window.nwp_before = w.value("nwp_before", c.window.nwp_before);
    c.window.nwp_after = w.value("nwp_after", c.window.nwp_after);
    c.window.horizon_count = w.value("horizon_count", c.window.horizon_count);
  }
  if (doc.contains("splits")) {
    const auto& s = doc.at("splits");
    c.splits.n_train = s.value("train", c.splits.n_train);
    c.splits.n_val = s.value("val", c.splits.n_val);
    c.splits.n_test = s.value("test", c.splits.n_test);
  }
  if (doc.contains("data")) {
    const auto& d = doc.at("data");
    if (d.contains("synthetic")) {
      const auto& g = d.at("synthetic");
      SyntheticFarmSpec farm;
      farm.n = g.value("n", farm.n);
      farm.autocorrelation = g.value("autocorrelation", farm.autocorrelation);
      farm.nwp_error_amplitude = g.value("nwp_error_amplitude", farm.nwp_error_amplitude);
      farm.nwp_error_smoothness = g.value("nwp_error_smoothness", farm.nwp_error_smoothness);
      farm.relevant_nwp = g.value("relevant_nwp", farm.relevant_nwp);
      farm.decoy_nwp = g.value("decoy_nwp", farm.decoy_nwp);
      farm.clamp_fraction = g.value("clamp_fraction", farm.clamp_fraction);
      farm.seed = g.contains("seed") ? g.at("seed").get<std::uint64_t>() : c.seed;
      c.data.synthetic = farm;
    }
    c.data.turbine_csv = d.value("turbine_csv", c.data.turbine_csv);
    c.data.nwp_csv = d.value("nwp_csv", c.data.nwp_csv);
    if (d.contains("roles"))
      for (const auto& [name, role] : d.at("roles").items())
        c.data.roles[name] = role_from_name(role.get<std::string>());
    c.data.direction_channels = d.value("direction_channels", c.data.direction_channels);
  }
  if (doc.contains("predictors")) {
    const auto& p = doc.at("predictors");
    auto& pc = c.predictors;
    pc.ols = p.value("ols", pc.ols);
    pc.stepwise = p.value("stepwise", pc.stepwise);
    if (p.contains("stepwise_counts")) pc.stepwise_counts = p.at("stepwise_counts").get<std::vector<int>>();
    pc.lasso = p.value("lasso", pc.lasso);
    if (p.contains("lasso_grid")) pc.lasso_grid = parse_grid(p.at("lasso_grid"), "lasso_grid");
    pc.lasso_tol = p.value("lasso_tol", pc.lasso_tol);
    pc.lasso_max_iter = p.value("lasso_max_iter", pc.lasso_max_iter);
    pc.nystrom_krr = p.value("nystrom_krr", pc.nystrom_krr);
    if (p.contains("krr_gamma_grid")) pc.krr_gamma_grid = parse_grid(p.at("krr_gamma_grid"), "krr_gamma_grid");
    if (p.contains("krr_lambda_grid"))
      pc.krr_lambda_grid = parse_grid(p.at("krr_lambda_grid"), "krr_lambda_grid");
    pc.krr_anchors = p.value("krr_anchors", pc.krr_anchors);
  }
  if (doc.contains("selection")) {
    const auto& s = doc.at("selection");
    auto& sc = c.selection;
    sc.method = s.value("method", sc.method);
    sc.top_k = s.value("top_k", sc.top_k);
    sc.bahsic_fraction = s.value("bahsic_fraction", sc.bahsic_fraction);
    sc.bahsic_stop_at = s.value("bahsic_stop_at", sc.bahsic_stop_at);
    sc.bahsic_top = s.value("bahsic_top", sc.bahsic_top);
    sc.bahsic_p = s.value("bahsic_p", sc.bahsic_p);
    sc.bahsic_p_prime = s.value("bahsic_p_prime", sc.bahsic_p_prime);
  }
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json doc;
  doc["seed"] = c.seed;
  doc["task"] = c.task;
  doc["target_channel"] = c.target_channel;
  doc["speed_channel"] = c.speed_channel;
  doc["nwp_baseline_channel"] = c.nwp_baseline_channel;
  doc["power_mode"] = c.power_mode;
  doc["power_curve_k"] = c.power_curve_k;
  if (!c.horizons.empty()) doc["horizons"] = c.horizons;
  doc["window"] = {{"past_len", c.window.past_len},
                   {"nwp_before", c.window.nwp_before},
                   {"nwp_after", c.window.nwp_after},
                   {"horizon_count", c.window.horizon_count}};
  doc["splits"] = {{"train", c.splits.n_train}, {"val", c.splits.n_val}, {"test", c.splits.n_test}};
  nlohmann::json data;
  if (c.data.synthetic) {
    const auto& f = *c.data.synthetic;
    data["synthetic"] = {{"n", f.n},
                         {"autocorrelation", f.autocorrelation},
                         {"nwp_error_amplitude", f.nwp_error_amplitude},
                         {"nwp_error_smoothness", f.nwp_error_smoothness},
                         {"relevant_nwp", f.relevant_nwp},
                         {"decoy_nwp", f.decoy_nwp},
                         {"clamp_fraction", f.clamp_fraction},
                         {"seed", f.seed}};
  }
  if (!c.data.turbine_csv.empty()) data["turbine_csv"] = c.data.turbine_csv;
  if (!c.data.nwp_csv.empty()) data["nwp_csv"] = c.data.nwp_csv;
  if (!c.data.roles.empty()) {
    nlohmann::json roles;
    for (const auto& [name, role] : c.data.roles) roles[name] = role_name(role);
    data["roles"] = roles;
  }
  if (!c.data.direction_channels.empty()) data["direction_channels"] = c.data.direction_channels;
  doc["data"] = data;
  doc["predictors"] = {{"ols", c.predictors.ols},
                       {"stepwise", c.predictors.stepwise},
                       {"stepwise_counts", c.predictors.stepwise_counts},
                       {"lasso", c.predictors.lasso},
                       {"lasso_grid", c.predictors.lasso_grid},
                       {"lasso_tol", c.predictors.lasso_tol},
                       {"lasso_max_iter", c.predictors.lasso_max_iter},
                       {"nystrom_krr", c.predictors.nystrom_krr},
                       {"krr_gamma_grid", c.predictors.krr_gamma_grid},
                       {"krr_lambda_grid", c.predictors.krr_lambda_grid},
                       {"krr_anchors", c.predictors.krr_anchors}};
  doc["selection"] = {{"method", c.selection.method},
                      {"top_k", c.selection.top_k},
                      {"bahsic_fraction", c.selection.bahsic_fraction},
                      {"bahsic_stop_at", c.selection.bahsic_stop_at},
                      {"bahsic_top", c.selection.bahsic_top},
                      {"bahsic_p", c.selection.bahsic_p},
                      {"bahsic_p_prime", c.selection.bahsic_p_prime}};
  return doc;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (const char* env = std::getenv("WINDCAST_SEED")) {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw std::runtime_error("WINDCAST_SEED is not an integer");
    doc["seed"] = static_cast<std::uint64_t>(seed);
  }
  ExperimentConfig config = config_from_json(doc);
  config.validate();
  return config;
}

TimeSeriesFrame load_frame(const ExperimentConfig& config) {
  const auto& d = config.data;
  TimeSeriesFrame frame;
  if (d.synthetic) {
    frame = synth_generate(*d.synthetic);
  } else {
    std::vector<TimeSeriesFrame> turbines;
    turbines.reserve(d.turbine_csv.size());
    for (const auto& path : d.turbine_csv) turbines.push_back(ingest_csv(path, d.roles));
    frame = turbines.size() == 1 ? std::move(turbines.front()) : average_turbines(turbines);
    if (!d.nwp_csv.empty()) {
      TimeSeriesFrame nwp = ingest_csv(d.nwp_csv, d.roles);
      if (nwp.cadence != frame.cadence) nwp = resample_linear(nwp, frame.cadence);
      frame = merge_frames(frame, nwp);
    }
  }
  for (const auto& channel : d.direction_channels) frame = encode_direction(frame, channel);
  frame.validate();
  return frame;
}

// ---- experiment ------------------------------------------------------------

namespace {

struct RunContext {
  const ExperimentConfig* config = nullptr;
  TimeSeriesFrame frame;
  SplitPlan plan;
  bool power = false;
  bool have_nwp = false;
  const Channel* target = nullptr;
  const Channel* speed = nullptr;
  double z_bar = 1.0;
};

RunContext make_context(const ExperimentConfig& config) {
  config.validate();
  RunContext ctx;
  ctx.config = &config;
  ctx.frame = load_frame(config);
  ctx.power = config.task == "power";

  ctx.target = ctx.frame.find(config.target_channel);
  if (!ctx.target) throw std::runtime_error("target channel not found: " + config.target_channel);
  if (ctx.target->role == ChannelRole::NWP)
    throw std::runtime_error("target channel must be a measured channel: " + config.target_channel);
  if (ctx.power) {
    ctx.speed = ctx.frame.find(config.speed_channel);
    if (!ctx.speed) throw std::runtime_error("speed channel not found: " + config.speed_channel);
    if (ctx.speed->role == ChannelRole::NWP)
      throw std::runtime_error("speed channel must be a measured channel: " + config.speed_channel);
  }

  bool any_nwp = false;
  for (const auto& ch : ctx.frame.channels) any_nwp = any_nwp || ch.role == ChannelRole::NWP;
  if (any_nwp) {
    const Channel* nwp = ctx.frame.find(config.nwp_baseline_channel);
    if (!nwp || nwp->role != ChannelRole::NWP)
      throw std::runtime_error("nwp baseline channel not found or not an NWP channel: " +
                               config.nwp_baseline_channel);
    ctx.have_nwp = true;
  }

  ctx.plan = make_rolling_splits(ctx.frame.length(), config.splits);
  ctx.z_bar = finite_mean(ctx.target->values);
  return ctx;
}

std::vector<Variant> task_variants(const RunContext& ctx, const SupervisedDataset& ds,
                                   const Eigen::VectorXd& ws_targets) {
  std::vector<Variant> variants;
  if (!ctx.power) {
    variants.push_back({"", ds.Y.col(0), false, 0});
    return variants;
  }
  const auto& mode = ctx.config->power_mode;
  if (mode == "direct" || mode == "both") variants.push_back({"_direct", ds.Y.col(0), false, 0});
  if (mode == "indirect" || mode == "both") variants.push_back({"_indirect", ws_targets, true, 1});
  return variants;
}

// Drops rows whose indirect target ws[t+h] is missing so that the direct and
// indirect variants share one row set per (split, horizon) cell.
void filter_power_rows(SupervisedDataset& ds, Eigen::VectorXd& ws_targets) {
  std::vector<std::ptrdiff_t> keep;
  keep.reserve(static_cast<std::size_t>(ds.X.rows()));
  for (Eigen::Index r = 0; r < ds.X.rows(); ++r)
    if (std::isfinite(ws_targets[r])) keep.push_back(r);
  if (static_cast<Eigen::Index>(keep.size()) == ds.X.rows()) return;
  if (keep.empty()) throw std::runtime_error("no rows with an observed speed target");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(keep.size()), ds.X.cols());
  Eigen::MatrixXd y(static_cast<Eigen::Index>(keep.size()), ds.Y.cols());
  Eigen::VectorXd ws(static_cast<Eigen::Index>(keep.size()));
  std::vector<std::ptrdiff_t> anchors(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = ds.X.row(keep[i]);
    y.row(static_cast<Eigen::Index>(i)) = ds.Y.row(keep[i]);
    ws[static_cast<Eigen::Index>(i)] = ws_targets[keep[i]];
    anchors[i] = ds.sample_anchors[static_cast<std::size_t>(keep[i])];
  }
  ds.X = std::move(x);
  ds.Y = std::move(y);
  ds.sample_anchors = std::move(anchors);
  ws_targets = std::move(ws);
}

// BAHSIC prep runs once per split on the joint all-horizons dataset, so the
// channel choice is shared by every horizon and deleting one horizon from the
// run cannot change another's features.
void bahsic_prep(const RunContext& ctx, ScoreReport& report, std::vector<SplitPrep>& preps) {
  const auto& config = *ctx.config;
  struct TargetSide {
    std::string channel;
    std::uint64_t tag;
    bool reported;  // the task target's trace goes into the report
  };
  std::vector<TargetSide> sides;
  if (!ctx.power) {
    sides.push_back({config.target_channel, 0, true});
  } else {
    const auto& mode = config.power_mode;
    if (mode == "direct" || mode == "both") sides.push_back({config.target_channel, 0, true});
    if (mode == "indirect" || mode == "both")
      sides.push_back({config.speed_channel, 1, mode == "indirect"});
  }

  std::vector<std::map<std::string, double>> reported_scores;
  for (const auto& side : sides) {
    const SupervisedDataset ds = build_supervised(ctx.frame, config.window, side.channel, all_horizons);
    const auto groups = make_groups(ds.feature_labels);
    const int m = config.window.horizon_count;
    for (std::size_t s = 0; s < ctx.plan.splits.size(); ++s) {
      const Split& sp = ctx.plan.splits[s];
      const RowRange tr = part_rows(ds.sample_anchors, sp.train, 1, m);
      if (tr.empty())
        throw std::runtime_error("split " + std::to_string(s) + ": empty train part for selection");

      const Standardizer sx = fit_standardizer(ds.X, tr.lo, tr.hi, "train");
      const Standardizer sy = fit_standardizer(ds.Y, tr.lo, tr.hi, "train");
      const Eigen::MatrixXd xs = sx.transform(ds.X.middleRows(tr.lo, tr.size()));
      const Eigen::MatrixXd ys = sy.transform(ds.Y.middleRows(tr.lo, tr.size()));

      HsicConfig hc;
      hc.p = config.selection.bahsic_p;
      hc.p_prime = config.selection.bahsic_p_prime;
      hc.seed = derive_seed(config.seed, s, 0, kSeedBahsic * 8 + side.tag);

      EliminationTrace trace = bahsic_rank(xs, groups, ys, hc, config.selection.bahsic_fraction,
                                           config.selection.bahsic_stop_at);

      std::vector<VariableGroup> survivor_groups;
      for (const auto& g : groups)
        if (std::find(trace.survivors.begin(), trace.survivors.end(), g.name) != trace.survivors.end())
          survivor_groups.push_back(g);
      const auto scores = hsic_importance(xs, survivor_groups, ys, hc);

      // Most important last in final_ranking; walk it backwards for the top set.
      std::vector<std::string> top;
      for (auto it = trace.final_ranking.rbegin();
           it != trace.final_ranking.rend() && static_cast<int>(top.size()) < config.selection.bahsic_top;
           ++it)
        if (scores.count(*it)) top.push_back(*it);
      preps[s].krr_channels[side.tag] = top;

      report.fit_records.push_back({"selection", "bahsic" + std::string(side.reported ? "" : "_speed"),
                                    static_cast<int>(s), 0, tr.size(),
                                    ds.sample_anchors[static_cast<std::size_t>(tr.hi - 1)] + m,
                                    sp.test.begin});
      if (side.reported) {
        report.bahsic_traces.push_back(std::move(trace));
        reported_scores.push_back(scores);
      }
    }
  }
  if (!reported_scores.empty()) report.bahsic_scores = average_scores(reported_scores);
}

}  // namespace

ScoreReport run_experiment(const ExperimentConfig& config) { return run_experiment(config, nullptr); }

ScoreReport run_experiment(const ExperimentConfig& config, nlohmann::ordered_json* models_out) {
  const RunContext ctx = make_context(config);
  const auto horizons = config.horizon_list();
  const auto& pc = config.predictors;
  const int split_count = static_cast<int>(ctx.plan.splits.size());

  ScoreReport report;
  report.z_bar = ctx.z_bar;
  report.horizon_count = static_cast<int>(horizons.size());
  report.split_count = split_count;
  if (!ctx.power) {
    report.baselines.push_back("persistence");
    if (ctx.have_nwp) report.baselines.push_back("nwp");
  } else {
    report.baselines.push_back("persistence_direct");
    report.baselines.push_back("persistence_indirect");
    if (ctx.have_nwp) report.baselines.push_back("nwp_indirect");
  }

  // Split-wide preparation: power curves and (optionally) BAHSIC channels.
  std::vector<SplitPrep> preps(static_cast<std::size_t>(split_count));
  if (ctx.power) {
    const auto& ws = ctx.speed->values;
    const auto& pw = ctx.target->values;
    for (int s = 0; s < split_count; ++s) {
      const Split& sp = ctx.plan.splits[static_cast<std::size_t>(s)];
      std::vector<double> cw, cp;
      for (std::ptrdiff_t i = sp.train.begin; i < sp.train.end; ++i)
        if (std::isfinite(ws[static_cast<std::size_t>(i)]) && std::isfinite(pw[static_cast<std::size_t>(i)])) {
          cw.push_back(ws[static_cast<std::size_t>(i)]);
          cp.push_back(pw[static_cast<std::size_t>(i)]);
        }
      if (cw.empty()) throw std::runtime_error("split " + std::to_string(s) + ": no power-curve pairs");
      const int k = static_cast<int>(std::min<std::ptrdiff_t>(config.power_curve_k,
                                                              static_cast<std::ptrdiff_t>(cw.size())));
      preps[static_cast<std::size_t>(s)].curve.emplace(fit_power_curve(cw, cp, k));
      report.fit_records.push_back({"power_curve", "indirect", s, 0,
                                    static_cast<std::ptrdiff_t>(cw.size()), sp.train.end - 1,
                                    sp.test.begin});
    }
    report.power_curve_grid = preps[0].curve->grid(0.1);
  }
  if (config.selection.method == "bahsic") bahsic_prep(ctx, report, preps);

  if (models_out) {
    (*models_out)["task"] = config.task;
    (*models_out)["seed"] = config.seed;
    (*models_out)["window"] = {{"past_len", config.window.past_len},
                               {"nwp_before", config.window.nwp_before},
                               {"nwp_after", config.window.nwp_after},
                               {"horizon_count", config.window.horizon_count}};
    (*models_out)["models"] = nlohmann::ordered_json::array();
  }

  // Selection models per horizon (per split) feeding the reported table.
  std::map<int, std::vector<LinearModel>> sel_models;
  std::vector<FeatureLabel> labels_for_report;

  for (int h : horizons) {
    SupervisedDataset ds = build_supervised(ctx.frame, config.window, config.target_channel, h);
    Eigen::VectorXd ws_targets;
    if (ctx.power) {
      const auto& ws = ctx.speed->values;
      ws_targets.resize(ds.X.rows());
      for (Eigen::Index r = 0; r < ds.X.rows(); ++r)
        ws_targets[r] = ws[static_cast<std::size_t>(ds.sample_anchors[static_cast<std::size_t>(r)] + h)];
      filter_power_rows(ds, ws_targets);
    }
    const auto& anchors = ds.sample_anchors;
    const Eigen::Index q = ds.X.cols();
    std::vector<Eigen::Index> all_cols(static_cast<std::size_t>(q));
    std::iota(all_cols.begin(), all_cols.end(), Eigen::Index{0});
    if (labels_for_report.empty()) labels_for_report = ds.feature_labels;
    if (models_out && !(*models_out).contains("features")) {
      nlohmann::ordered_json feats = nlohmann::ordered_json::array();
      for (const auto& label : ds.feature_labels) feats.push_back(label_to_json(label));
      (*models_out)["features"] = feats;
    }

    for (int s = 0; s < split_count; ++s) {
      const Split& sp = ctx.plan.splits[static_cast<std::size_t>(s)];
      const RowRange tr = part_rows(anchors, sp.train, h, h);
      const RowRange va = part_rows(anchors, sp.val, h, h);
      const RowRange te = part_rows(anchors, sp.test, h, h);
      const auto where = "split " + std::to_string(s) + ", horizon " + std::to_string(h);
      if (tr.empty() || va.empty() || te.empty())
        throw std::runtime_error(where + ": a split part has no usable rows after windowing");
      const RowRange tv{tr.lo, va.hi};

      const Standardizer std_x = fit_standardizer(ds.X, tr.lo, tr.hi, "train");
      const Eigen::MatrixXd xs_tr = std_x.transform(ds.X.middleRows(tr.lo, tr.size()));
      const Eigen::MatrixXd xs_va = std_x.transform(ds.X.middleRows(va.lo, va.size()));
      const Eigen::MatrixXd xs_tv = std_x.transform(ds.X.middleRows(tv.lo, tv.size()));
      const Eigen::MatrixXd xs_te = std_x.transform(ds.X.middleRows(te.lo, te.size()));
      const std::ptrdiff_t last_train_seen = anchors[static_cast<std::size_t>(tr.hi - 1)] + h;
      const std::ptrdiff_t last_val_seen = anchors[static_cast<std::size_t>(va.hi - 1)] + h;
      report.fit_records.push_back(
          {"standardizer", "shared", s, h, tr.size(), last_train_seen, sp.test.begin});

      const PowerCurve* curve = ctx.power ? &*preps[static_cast<std::size_t>(s)].curve : nullptr;
      const Eigen::VectorXd score_te =
          ctx.power ? Eigen::VectorXd(ds.Y.col(0).segment(te.lo, te.size()))
                    : Eigen::VectorXd();  // power: always scored against observed power

      // Baselines once per (split, horizon).
      {
        const std::vector<std::ptrdiff_t> te_anchors(anchors.begin() + te.lo, anchors.begin() + te.hi);
        if (!ctx.power) {
          const Eigen::VectorXd y_te = ds.Y.col(0).segment(te.lo, te.size());
          report.entries.push_back(
              {"persistence", s, h,
               nrmse(persistence_forecast(ctx.target->values, te_anchors, h), y_te, ctx.z_bar)});
          if (ctx.have_nwp)
            report.entries.push_back(
                {"nwp", s, h,
                 nrmse(nwp_forecast(ctx.frame, config.nwp_baseline_channel, te_anchors, h), y_te,
                       ctx.z_bar)});
        } else {
          report.entries.push_back(
              {"persistence_direct", s, h,
               nrmse(persistence_forecast(ctx.target->values, te_anchors, h), score_te, ctx.z_bar)});
          report.entries.push_back(
              {"persistence_indirect", s, h,
               nrmse(curve->predict(persistence_forecast(ctx.speed->values, te_anchors, h)), score_te,
                     ctx.z_bar)});
          if (ctx.have_nwp)
            report.entries.push_back(
                {"nwp_indirect", s, h,
                 nrmse(nwp_forecast(ctx.frame, config.nwp_baseline_channel, te_anchors, h, curve),
                       score_te, ctx.z_bar)});
        }
      }

      for (const Variant& variant : task_variants(ctx, ds, ws_targets)) {
        const Eigen::MatrixXd ym = variant.y;
        const Standardizer std_y = fit_standardizer(ym, tr.lo, tr.hi, "train");
        const Eigen::VectorXd ys_tr = std_y.transform(ym.middleRows(tr.lo, tr.size()));
        const Eigen::VectorXd ys_va = std_y.transform(ym.middleRows(va.lo, va.size()));
        const Eigen::VectorXd ys_tv = std_y.transform(ym.middleRows(tv.lo, tv.size()));
        const Eigen::VectorXd eval_te =
            ctx.power ? score_te : Eigen::VectorXd(ym.middleRows(te.lo, te.size()));

        // Variable selection decides the usable columns for this cell.
        std::vector<Eigen::Index> lin_cols = all_cols;
        std::vector<Eigen::Index> krr_cols = all_cols;
        if (config.selection.method == "lasso") {
          LassoSelection sel = lasso_select(xs_tr, ys_tr, xs_va, ys_va, ds.feature_labels, h, pc,
                                            config.selection.top_k);
          lin_cols = channel_columns(ds.feature_labels, sel.kept);
          krr_cols = lin_cols;
          report.fit_records.push_back({"selection", "lasso" + variant.suffix, s, h,
                                        tv.size(), last_val_seen, sp.test.begin});
          const bool reported_variant = variant.suffix != "_indirect" || config.power_mode == "indirect";
          if (reported_variant) sel_models[h].push_back(std::move(sel.chosen));
        } else if (config.selection.method == "bahsic") {
          krr_cols = channel_columns(ds.feature_labels,
                                     preps[static_cast<std::size_t>(s)].krr_channels.at(variant.tag));
        }

        const auto finish = [&](const std::string& name, const Eigen::VectorXd& pred_std,
                                const char* type, const std::vector<Eigen::Index>& cols,
                                nlohmann::ordered_json model_json) {
          Eigen::VectorXd pred = std_y.inverse_transform(pred_std);
          if (variant.through_curve) pred = curve->predict(pred);
          report.entries.push_back({name, s, h, nrmse(pred, eval_te, ctx.z_bar)});
          report.fit_records.push_back({"model", name, s, h, tv.size(), last_val_seen, sp.test.begin});
          if (models_out) {
            nlohmann::ordered_json rec;
            rec["predictor"] = name;
            rec["split"] = s;
            rec["horizon"] = h;
            rec["type"] = type;
            rec["columns"] = cols;
            rec["through_curve"] = variant.through_curve;
            rec["standardizer_x"] = standardizer_subset(std_x, cols);
            rec["standardizer_y"] = std_y;
            rec["model"] = std::move(model_json);
            (*models_out)["models"].push_back(std::move(rec));
          }
        };

        if (pc.ols || pc.stepwise || pc.lasso) {
          const Eigen::MatrixXd xl_tr = take_cols(xs_tr, lin_cols);
          const Eigen::MatrixXd xl_va = take_cols(xs_va, lin_cols);
          const Eigen::MatrixXd xl_tv = take_cols(xs_tv, lin_cols);
          const Eigen::MatrixXd xl_te = take_cols(xs_te, lin_cols);

          if (pc.ols) {
            const LinearModel model = ols_fit(xl_tv, ys_tv);
            finish("ols" + variant.suffix, linear_predict(model, xl_te), "linear", lin_cols,
                   nlohmann::ordered_json(model));
          }
          if (pc.stepwise) {
            const LinearModel picked =
                forward_stepwise_fit(xl_tr, ys_tr, xl_va, ys_va, pc.stepwise_counts);
            report.fit_records.push_back({"hyperparameters", "stepwise" + variant.suffix, s, h,
                                          tv.size(), last_val_seen, sp.test.begin});
            // Refit on train+val over the frozen prefix.
            std::vector<Eigen::Index> prefix(picked.selected.begin(), picked.selected.end());
            const LinearModel sub = ols_fit(take_cols(xl_tv, prefix), ys_tv);
            LinearModel model;
            model.weights = Eigen::VectorXd::Zero(xl_tv.cols());
            for (std::size_t i = 0; i < prefix.size(); ++i)
              model.weights[prefix[i]] = sub.weights[static_cast<Eigen::Index>(i)];
            model.intercept = sub.intercept;
            model.selected = picked.selected;
            finish("stepwise" + variant.suffix, linear_predict(model, xl_te), "linear", lin_cols,
                   nlohmann::ordered_json(model));
          }
          if (pc.lasso) {
            double best_err = std::numeric_limits<double>::infinity();
            double best_lambda = pc.lasso_grid.front();
            for (double lambda : pc.lasso_grid) {
              const LinearModel m = lasso_fit(xl_tr, ys_tr, lambda, pc.lasso_tol, pc.lasso_max_iter);
              const double err = rmse(linear_predict(m, xl_va), ys_va);
              if (err < best_err) {
                best_err = err;
                best_lambda = lambda;
              }
            }
            report.fit_records.push_back({"hyperparameters", "lasso" + variant.suffix, s, h,
                                          tv.size(), last_val_seen, sp.test.begin});
            const LinearModel model = lasso_fit(xl_tv, ys_tv, best_lambda, pc.lasso_tol, pc.lasso_max_iter);
            finish("lasso" + variant.suffix, linear_predict(model, xl_te), "linear", lin_cols,
                   nlohmann::ordered_json(model));
          }
        }

        if (pc.nystrom_krr) {
          const Eigen::MatrixXd xk_tr = take_cols(xs_tr, krr_cols);
          const Eigen::MatrixXd xk_va = take_cols(xs_va, krr_cols);
          const Eigen::MatrixXd xk_tv = take_cols(xs_tv, krr_cols);
          const Eigen::MatrixXd xk_te = take_cols(xs_te, krr_cols);
          const KrrChoice choice =
              krr_grid_search(xk_tr, ys_tr, xk_va, ys_va, pc,
                              derive_seed(config.seed, static_cast<std::uint64_t>(s),
                                          static_cast<std::uint64_t>(h), kSeedKrrGrid * 8 + variant.tag));
          report.fit_records.push_back({"hyperparameters", "nystrom_krr" + variant.suffix, s, h,
                                        tv.size(), last_val_seen, sp.test.begin});
          const std::ptrdiff_t p = std::min<std::ptrdiff_t>(pc.krr_anchors, tv.size());
          const NystromKrrModel model =
              nystrom_krr_fit(xk_tv, ys_tv, KernelSpec{choice.gamma}, choice.lambda, p,
                              derive_seed(config.seed, static_cast<std::uint64_t>(s),
                                          static_cast<std::uint64_t>(h), kSeedKrrRefit * 8 + variant.tag));
          finish("nystrom_krr" + variant.suffix, krr_predict(model, xk_te), "krr", krr_cols,
                 nlohmann::ordered_json(model));
        }
      }
    }
  }

  if (config.selection.method == "lasso") {
    report.lasso_scores.rows.clear();
    for (int h : horizons) {
      const auto table = lasso_variable_scores(sel_models.at(h), labels_for_report, h);
      report.lasso_scores.rows.insert(report.lasso_scores.rows.end(), table.rows.begin(),
                                      table.rows.end());
    }
    report.lasso_scores.splits_averaged = split_count;
    report.lasso_scores.farms_averaged = 1;
  }

  finalize_report(report);
  for (const auto& record : report.fit_records)
    if (record.last_observed_index >= record.test_begin)
      throw std::logic_error("fit hygiene violated: " + record.object + "/" + record.predictor +
                             " saw index " + std::to_string(record.last_observed_index) +
                             " at test_begin " + std::to_string(record.test_begin));
  return report;
}

SelectionResult run_selection(const ExperimentConfig& config) {
  if (config.selection.method == "none")
    throw std::invalid_argument("run_selection: selection method is 'none'");
  const RunContext ctx = make_context(config);
  const auto& pc = config.predictors;
  const int split_count = static_cast<int>(ctx.plan.splits.size());

  SelectionResult result;
  result.report.z_bar = ctx.z_bar;
  result.report.split_count = split_count;
  result.report.horizon_count = static_cast<int>(config.horizon_list().size());
  result.selected["method"] = config.selection.method;
  auto& out_splits = result.selected["splits"];
  out_splits = nlohmann::ordered_json::array();

  if (config.selection.method == "bahsic") {
    std::vector<SplitPrep> preps(static_cast<std::size_t>(split_count));
    bahsic_prep(ctx, result.report, preps);
    const std::uint64_t tag = (!ctx.power || config.power_mode != "indirect") ? 0 : 1;
    for (int s = 0; s < split_count; ++s) {
      nlohmann::ordered_json row;
      row["split"] = s;
      row["channels"] = preps[static_cast<std::size_t>(s)].krr_channels.at(tag);
      row["survivors"] = result.report.bahsic_traces[static_cast<std::size_t>(s)].survivors;
      out_splits.push_back(std::move(row));
    }
    result.report.horizon_count = 0;  // selection is split-wide
    return result;
  }

  // lasso: per (split, horizon), on the task target.
  const auto horizons = config.horizon_list();
  std::map<int, std::vector<LinearModel>> sel_models;
  std::vector<FeatureLabel> labels_for_report;
  std::map<int, nlohmann::ordered_json> per_split;
  for (int s = 0; s < split_count; ++s) {
    per_split[s]["split"] = s;
    per_split[s]["horizons"] = nlohmann::ordered_json::array();
  }
  for (int h : horizons) {
    SupervisedDataset ds = build_supervised(ctx.frame, config.window, config.target_channel, h);
    if (labels_for_report.empty()) labels_for_report = ds.feature_labels;
    const auto& anchors = ds.sample_anchors;
    for (int s = 0; s < split_count; ++s) {
      const Split& sp = ctx.plan.splits[static_cast<std::size_t>(s)];
      const RowRange tr = part_rows(anchors, sp.train, h, h);
      const RowRange va = part_rows(anchors, sp.val, h, h);
      if (tr.empty() || va.empty())
        throw std::runtime_error("split " + std::to_string(s) + ", horizon " + std::to_string(h) +
                                 ": a split part has no usable rows after windowing");
      const Standardizer std_x = fit_standardizer(ds.X, tr.lo, tr.hi, "train");
      const Eigen::MatrixXd ym = ds.Y.col(0);
      const Standardizer std_y = fit_standardizer(ym, tr.lo, tr.hi, "train");
      LassoSelection sel = lasso_select(
          std_x.transform(ds.X.middleRows(tr.lo, tr.size())), std_y.transform(ym.middleRows(tr.lo, tr.size())),
          std_x.transform(ds.X.middleRows(va.lo, va.size())), std_y.transform(ym.middleRows(va.lo, va.size())),
          ds.feature_labels, h, pc, config.selection.top_k);
      result.report.fit_records.push_back(
          {"selection", "lasso", s, h, tr.size() + va.size(),
           anchors[static_cast<std::size_t>(va.hi - 1)] + h, sp.test.begin});
      nlohmann::ordered_json row;
      row["horizon"] = h;
      row["lambda"] = sel.lambda;
      row["channels"] = sel.kept;
      per_split[s]["horizons"].push_back(std::move(row));
      sel_models[h].push_back(std::move(sel.chosen));
    }
  }
  for (int s = 0; s < split_count; ++s) out_splits.push_back(std::move(per_split[s]));
  for (int h : horizons) {
    const auto table = lasso_variable_scores(sel_models.at(h), labels_for_report, h);
    result.report.lasso_scores.rows.insert(result.report.lasso_scores.rows.end(), table.rows.begin(),
                                           table.rows.end());
  }
  result.report.lasso_scores.splits_averaged = split_count;

  for (const auto& record : result.report.fit_records)
    if (record.last_observed_index >= record.test_begin)
      throw std::logic_error("fit hygiene violated in selection");
  return result;
}

// ---- report serialization ---------------------------------------------------

namespace {

nlohmann::ordered_json trace_to_json(const EliminationTrace& trace) {
  nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
  for (const auto& r : trace.rounds)
    rounds.push_back({{"eliminated", r.eliminated}, {"hsic_after", r.hsic_after}});
  return {{"rounds", std::move(rounds)},
          {"survivors", trace.survivors},
          {"final_ranking", trace.final_ranking}};
}

EliminationTrace trace_from_json(const nlohmann::json& j) {
  EliminationTrace trace;
  for (const auto& r : j.at("rounds"))
    trace.rounds.push_back(
        {r.at("eliminated").get<std::vector<std::string>>(), r.at("hsic_after").get<double>()});
  trace.survivors = j.at("survivors").get<std::vector<std::string>>();
  trace.final_ranking = j.at("final_ranking").get<std::vector<std::string>>();
  return trace;
}

}  // namespace

nlohmann::ordered_json report_to_json(const ScoreReport& report) {
  nlohmann::ordered_json doc;
  doc["z_bar"] = report.z_bar;
  doc["horizon_count"] = report.horizon_count;
  doc["split_count"] = report.split_count;
  doc["baselines"] = report.baselines;
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& e : report.entries)
    entries.push_back({{"predictor", e.predictor}, {"split", e.split}, {"horizon", e.horizon},
                       {"nrmse", e.nrmse}});
  doc["entries"] = std::move(entries);
  doc["delta_nrmse"] = report.delta_nrmse;
  doc["degradation"] = report.degradation;
  doc["average_rank"] = report.average_rank;
  if (!report.lasso_scores.rows.empty()) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : report.lasso_scores.rows)
      rows.push_back({{"variable", r.variable}, {"horizon", r.horizon}, {"score", r.score}});
    doc["lasso_scores"] = {{"rows", std::move(rows)},
                           {"splits_averaged", report.lasso_scores.splits_averaged},
                           {"farms_averaged", report.lasso_scores.farms_averaged}};
  }
  if (!report.bahsic_traces.empty()) {
    nlohmann::ordered_json traces = nlohmann::ordered_json::array();
    for (const auto& t : report.bahsic_traces) traces.push_back(trace_to_json(t));
    doc["bahsic_traces"] = std::move(traces);
    doc["bahsic_scores"] = report.bahsic_scores;
  }
  if (!report.power_curve_grid.empty()) {
    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    for (const auto& [speed, power] : report.power_curve_grid) grid.push_back({speed, power});
    doc["power_curve_grid"] = std::move(grid);
  }
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& r : report.fit_records)
    records.push_back({{"object", r.object},
                       {"predictor", r.predictor},
                       {"split", r.split},
                       {"horizon", r.horizon},
                       {"fit_row_count", r.fit_row_count},
                       {"last_observed_index", r.last_observed_index},
                       {"test_begin", r.test_begin}});
  doc["fit_records"] = std::move(records);
  return doc;
}

ScoreReport report_from_json(const nlohmann::json& doc) {
  ScoreReport report;
  report.z_bar = doc.at("z_bar").get<double>();
  report.horizon_count = doc.at("horizon_count").get<int>();
  report.split_count = doc.at("split_count").get<int>();
  report.baselines = doc.at("baselines").get<std::vector<std::string>>();
  for (const auto& e : doc.at("entries"))
    report.entries.push_back({e.at("predictor").get<std::string>(), e.at("split").get<int>(),
                              e.at("horizon").get<int>(), e.at("nrmse").get<double>()});
  report.delta_nrmse = doc.value("delta_nrmse", report.delta_nrmse);
  report.degradation = doc.value("degradation", report.degradation);
  report.average_rank = doc.value("average_rank", report.average_rank);
  if (doc.contains("lasso_scores")) {
    const auto& t = doc.at("lasso_scores");
    for (const auto& r : t.at("rows"))
      report.lasso_scores.rows.push_back(
          {r.at("variable").get<std::string>(), r.at("horizon").get<int>(), r.at("score").get<double>()});
    report.lasso_scores.splits_averaged = t.value("splits_averaged", 1);
    report.lasso_scores.farms_averaged = t.value("farms_averaged", 1);
  }
  if (doc.contains("bahsic_traces")) {
    for (const auto& t : doc.at("bahsic_traces")) report.bahsic_traces.push_back(trace_from_json(t));
    report.bahsic_scores = doc.value("bahsic_scores", report.bahsic_scores);
  }
  if (doc.contains("power_curve_grid"))
    for (const auto& pair : doc.at("power_curve_grid"))
      report.power_curve_grid.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
  if (doc.contains("fit_records"))
    for (const auto& r : doc.at("fit_records"))
      report.fit_records.push_back({r.at("object").get<std::string>(),
                                    r.at("predictor").get<std::string>(), r.at("split").get<int>(),
                                    r.at("horizon").get<int>(),
                                    r.at("fit_row_count").get<std::ptrdiff_t>(),
                                    r.at("last_observed_index").get<std::ptrdiff_t>(),
                                    r.at("test_begin").get<std::ptrdiff_t>()});
  return report;
}

void emit_report(const ScoreReport& report, const std::string& out_dir, bool csv, bool json) {
  if (report.entries.empty()) throw std::logic_error("emit_report: no score entries");
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  if (csv) {
    write_text_file(dir / "scores.csv", score_report_csv(report));
    if (!report.lasso_scores.rows.empty()) {
      VariableScoreTable table = report.lasso_scores;
      write_text_file(dir / "importance.csv", variable_scores_csv(table));
    } else if (!report.bahsic_traces.empty()) {
      write_text_file(dir / "importance.csv",
                      elimination_csv(report.bahsic_traces.front(), report.bahsic_scores));
    }
    if (!report.power_curve_grid.empty()) {
      std::string text = "speed,power\n";
      for (const auto& [speed, power] : report.power_curve_grid)
        text += fmt_g(speed) + "," + fmt_g(power) + "\n";
      write_text_file(dir / "powercurve.csv", text);
    }
  }
  if (json) write_text_file(dir / "aggregates.json", score_report_aggregates(report));
}

}  // namespace windcast
