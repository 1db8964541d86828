// windcast CLI: synth | select | train | evaluate | report.
// All subcommands read the same JSON config; flags override top-level
// scalars; WINDCAST_SEED overrides the seed. Failures print one structured
// JSON error line to stderr and exit nonzero.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "windcast/pipeline.hpp"
#include "windcast/time_series.hpp"

namespace {

struct ScalarOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> task;
  std::optional<std::string> target_channel;
  std::optional<std::string> speed_channel;
  std::optional<std::string> nwp_baseline_channel;
  std::optional<std::string> power_mode;
};

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return nlohmann::json::parse(in);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Precedence: config file < WINDCAST_SEED < command-line flags.
windcast::ExperimentConfig make_config(const std::string& path, const ScalarOverrides& ov) {
  nlohmann::json doc = read_json_file(path);
  if (const char* env = std::getenv("WINDCAST_SEED")) {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw std::runtime_error("WINDCAST_SEED is not an integer");
    doc["seed"] = static_cast<std::uint64_t>(seed);
  }
  if (ov.seed) doc["seed"] = *ov.seed;
  if (ov.task) doc["task"] = *ov.task;
  if (ov.target_channel) doc["target_channel"] = *ov.target_channel;
  if (ov.speed_channel) doc["speed_channel"] = *ov.speed_channel;
  if (ov.nwp_baseline_channel) doc["nwp_baseline_channel"] = *ov.nwp_baseline_channel;
  if (ov.power_mode) doc["power_mode"] = *ov.power_mode;
  windcast::ExperimentConfig config = windcast::config_from_json(doc);
  config.validate();
  return config;
}

void write_report_bundle(const windcast::ScoreReport& report, const std::string& out_dir) {
  windcast::emit_report(report, out_dir);
  write_file(std::filesystem::path(out_dir) / "report.json",
             windcast::report_to_json(report).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid NWP + in-situ wind speed and power forecasting"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string report_in;
  ScalarOverrides ov;

  const auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("-c,--config", config_path, "JSON experiment config")
          ->required()
          ->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", out_dir, "output directory (default: out)");
    cmd->add_option("--seed", ov.seed, "override the config seed");
    cmd->add_option("--task", ov.task, "override the task (speed|power)");
    cmd->add_option("--target-channel", ov.target_channel, "override the target channel");
    cmd->add_option("--speed-channel", ov.speed_channel, "override the speed channel");
    cmd->add_option("--nwp-channel", ov.nwp_baseline_channel, "override the NWP baseline channel");
    cmd->add_option("--power-mode", ov.power_mode, "override the power mode (direct|indirect|both)");
  };

  CLI::App* synth = app.add_subcommand("synth", "write the configured synthetic farm as CSV");
  add_common(synth, true);
  CLI::App* select = app.add_subcommand("select", "run variable selection only");
  add_common(select, true);
  CLI::App* train = app.add_subcommand("train", "run the experiment and save fitted models");
  add_common(train, true);
  CLI::App* evaluate = app.add_subcommand("evaluate", "run the experiment and write the report");
  add_common(evaluate, true);
  CLI::App* report_cmd = app.add_subcommand("report", "re-emit CSV/JSON outputs from a report.json");
  report_cmd->add_option("-i,--in", report_in, "report.json produced by evaluate")
      ->required()
      ->check(CLI::ExistingFile);
  report_cmd->add_option("-o,--out", out_dir, "output directory (default: out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << nlohmann::json{{"error", {{"type", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }

  try {
    if (synth->parsed()) {
      const auto config = make_config(config_path, ov);
      if (!config.data.synthetic)
        throw std::invalid_argument("synth: config has no data.synthetic block");
      const auto frame = windcast::load_frame(config);
      write_file(std::filesystem::path(out_dir) / "synthetic.csv", windcast::frame_to_csv(frame));
    } else if (select->parsed()) {
      const auto config = make_config(config_path, ov);
      const auto result = windcast::run_selection(config);
      if (!result.report.lasso_scores.rows.empty())
        write_file(std::filesystem::path(out_dir) / "importance.csv",
                   windcast::variable_scores_csv(result.report.lasso_scores));
      else if (!result.report.bahsic_traces.empty())
        write_file(std::filesystem::path(out_dir) / "importance.csv",
                   windcast::elimination_csv(result.report.bahsic_traces.front(),
                                             result.report.bahsic_scores));
      write_file(std::filesystem::path(out_dir) / "selection.json", result.selected.dump(2) + "\n");
    } else if (train->parsed()) {
      const auto config = make_config(config_path, ov);
      nlohmann::ordered_json models;
      const auto report = windcast::run_experiment(config, &models);
      write_report_bundle(report, out_dir);
      write_file(std::filesystem::path(out_dir) / "models.json", models.dump(2) + "\n");
    } else if (evaluate->parsed()) {
      const auto config = make_config(config_path, ov);
      const auto report = windcast::run_experiment(config);
      write_report_bundle(report, out_dir);
    } else if (report_cmd->parsed()) {
      const auto report = windcast::report_from_json(read_json_file(report_in));
      windcast::emit_report(report, out_dir);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << nlohmann::json{{"error", {{"type", "invalid_argument"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << nlohmann::json{{"error", {{"type", "runtime_error"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", {{"type", "error"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
