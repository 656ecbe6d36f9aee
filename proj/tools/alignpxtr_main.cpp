#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "alignpxtr/commands.hpp"
#include "alignpxtr/config.hpp"

namespace fs = std::filesystem;
using namespace alignpxtr;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Experiment configuration (JSON); default scenario if omitted");
  cmd->add_option("--seed", opts.seed, "Override the master seed");
  cmd->add_option("--out", opts.out, "Output path");
}

ExperimentConfig load_config(const CommonOptions& opts) {
  ExperimentConfig config = opts.config.empty() ? default_experiment() : ExperimentConfig::load(opts.config);
  if (opts.seed) config.seed = *opts.seed;
  config.validate();
  return config;
}

fs::path out_or(const CommonOptions& opts, const fs::path& fallback) {
  return opts.out.empty() ? fallback : fs::path(opts.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alignpxtr: conditional quantile alignment of predicted behaviors"};
  app.require_subcommand(1);

  CommonOptions sim_opts;
  auto* sim = app.add_subcommand("simulate", "Generate synthetic records");
  add_common(sim, sim_opts);

  CommonOptions fit_opts;
  std::string fit_data;
  auto* fit = app.add_subcommand("fit", "Train predictors and fit conditional models");
  add_common(fit, fit_opts);
  fit->add_option("--data", fit_data, "Input data CSV")->required();

  CommonOptions tr_opts;
  std::string tr_data;
  std::string tr_models;
  auto* tr = app.add_subcommand("transform", "Append aligned scores to a data file");
  add_common(tr, tr_opts);
  tr->add_option("--data", tr_data, "Input data CSV")->required();
  tr->add_option("--models", tr_models, "Directory written by fit")->required();

  CommonOptions ev_opts;
  std::string ev_data;
  std::string ev_models;
  auto* ev = app.add_subcommand("evaluate", "Compute the independence and recovery report");
  add_common(ev, ev_opts);
  ev->add_option("--data", ev_data, "Transformed data CSV")->required();
  ev->add_option("--models", ev_models, "Directory written by fit, for artifact fingerprints");

  CommonOptions pipe_opts;
  auto* pipe = app.add_subcommand("pipeline", "simulate, fit, transform and evaluate in one run");
  add_common(pipe, pipe_opts);

  CommonOptions cfg_opts;
  auto* cfg = app.add_subcommand("config", "Print the effective configuration");
  add_common(cfg, cfg_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const auto config = load_config(sim_opts);
      const auto n = cmd_simulate(config, out_or(sim_opts, config.output_directory / "data.csv"), std::cerr);
      std::cout << n << '\n';
    } else if (fit->parsed()) {
      const auto config = load_config(fit_opts);
      cmd_fit(config, fit_data, out_or(fit_opts, config.output_directory / "models"), std::cerr);
    } else if (tr->parsed()) {
      const auto config = load_config(tr_opts);
      const auto n = cmd_transform(config, tr_data, tr_models,
                                   out_or(tr_opts, config.output_directory / "transformed.csv"), std::cerr);
      std::cout << n << '\n';
    } else if (ev->parsed()) {
      const auto config = load_config(ev_opts);
      std::optional<fs::path> models;
      if (!ev_models.empty()) models = ev_models;
      const auto report = cmd_evaluate(config, ev_data,
                                       out_or(ev_opts, config.output_directory / "report.json"), models,
                                       std::cerr);
      std::cout << report.to_json().dump(2) << '\n';
    } else if (pipe->parsed()) {
      const auto config = load_config(pipe_opts);
      const auto report = cmd_pipeline(config, out_or(pipe_opts, config.output_directory), std::cerr);
      std::cout << report.to_json().dump(2) << '\n';
    } else if (cfg->parsed()) {
      const auto config = load_config(cfg_opts);
      const auto text = config.to_json().dump(2);
      if (cfg_opts.out.empty()) {
        std::cout << text << '\n';
      } else {
        std::ofstream(cfg_opts.out) << text << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "alignpxtr: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
