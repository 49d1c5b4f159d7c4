#include "mhcv/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw mhcv::InputError("cannot write '" + path.string() + "'");
  return out;
}

mhcv::ExperimentConfig prepare(const std::string& path, const std::optional<std::uint64_t>& seed,
                               const std::string& out) {
  auto cfg = mhcv::load_config(path);
  if (seed) {
    cfg.seed = *seed;
    cfg.seed_set = true;
  }
  if (!out.empty()) cfg.output = out;
  std::filesystem::create_directories(cfg.output);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control variates for Metropolis-Hastings ergodic averages"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--out", out, "Output directory");

  auto* run = app.add_subcommand("run", "Run the (m, k) table");
  run->add_option("config", config_path, "Experiment config")->required();
  auto* diagnose = app.add_subcommand("diagnose", "Rate diagnostics per allotment");
  diagnose->add_option("config", config_path, "Experiment config")->required();
  for (auto* sub : {run, diagnose}) {
    sub->add_option("--seed", seed, "Override the master seed");
    sub->add_option("--out", out, "Output directory");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = prepare(config_path, seed, out);
    const std::filesystem::path dir = cfg.output;
    if (run->parsed()) {
      const auto cells = mhcv::run_experiment(cfg, &std::cerr);
      auto csv = open_output(dir / "results.csv");
      mhcv::write_results_csv(csv, cells);
      auto table = open_output(dir / "results.txt");
      mhcv::write_results_table(table, cells);
      mhcv::write_results_table(std::cout, cells);
    } else {
      const auto rows = mhcv::run_diagnostics(cfg, &std::cerr);
      auto csv = open_output(dir / "diagnostics.csv");
      mhcv::write_diagnostics_csv(csv, rows);
      mhcv::write_diagnostics_csv(std::cout, rows);
    }
  } catch (const mhcv::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
