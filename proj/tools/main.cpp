#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "blowup/config.hpp"
#include "blowup/error.hpp"
#include "blowup/experiment.hpp"
#include "blowup/function_model.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::string> h;
  std::optional<std::string> g;
  std::optional<int> n;
  std::optional<double> alpha;
  std::optional<double> T;
  std::optional<double> horizon;
  std::optional<double> u0;
  std::optional<int> J;
  std::optional<double> rho;
  std::optional<int> grid;
  std::optional<int> trials;
  std::optional<std::string> csv;
  std::vector<double> thresholds;
};

blowup::ExperimentConfig build_config(const Overrides& o, blowup::RunKind run) {
  blowup::ExperimentConfig cfg = o.config.empty() ? blowup::ExperimentConfig{} : blowup::load_config(o.config);
  cfg.run = run;
  if (!o.out.empty()) cfg.out = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.tol) cfg.tol = *o.tol;
  if (o.h) cfg.h = blowup::parse_fn_spec(*o.h);
  if (o.g) cfg.g = blowup::parse_fn_spec(*o.g);
  if (o.n) cfg.n = *o.n;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.T) cfg.T = *o.T;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.u0) cfg.u0 = *o.u0;
  if (o.J) cfg.J = *o.J;
  if (o.rho) cfg.rho = *o.rho;
  if (o.grid) cfg.grid = *o.grid;
  if (o.trials) cfg.trials = *o.trials;
  if (o.csv) cfg.csv = *o.csv;
  if (!o.thresholds.empty()) cfg.thresholds = o.thresholds;
  return cfg;
}

int run_one(const Overrides& o, blowup::RunKind run) {
  blowup::ExperimentConfig cfg;
  try {
    cfg = build_config(o, run);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return blowup::kExitError;
  }
  const auto outcome = blowup::run_experiment(cfg);
  std::cout << outcome.report_text();
  return outcome.exit_code;
}

int run_batch(const Overrides& o, const std::vector<std::string>& configs, unsigned jobs) {
  const std::string base = o.out.empty() ? "out" : o.out;
  std::vector<int> codes(configs.size(), blowup::kExitError);
  std::vector<std::string> lines(configs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      const std::string stem = std::filesystem::path(configs[i]).stem().string();
      try {
        auto cfg = blowup::load_config(configs[i]);
        cfg.out = (std::filesystem::path(base) / stem).string();
        cfg.csv.reset();
        if (o.seed) cfg.seed = *o.seed;
        if (o.tol) cfg.tol = *o.tol;
        const auto outcome = blowup::run_experiment(cfg);
        codes[i] = outcome.exit_code;
        lines[i] = stem + ": " + outcome.field("status");
      } catch (const std::exception& e) {
        lines[i] = stem + ": error: " + e.what();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (const auto& line : lines) std::cout << line << '\n';
  return codes.empty() ? 0 : *std::max_element(codes.begin(), codes.end());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blow-up versus global existence for w^(m) = f(t, w, ..., w^(m-1))"};
  // --h names the nonlinearity, so help is long-only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, "Experiment config file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", o.seed, "Seed for randomized checks");
  app.add_option("--tol", o.tol, "Solver tolerance");

  std::optional<blowup::RunKind> chosen;
  auto sub = [&](const char* name, const char* help, blowup::RunKind kind) {
    auto* s = app.add_subcommand(name, help);
    s->callback([&chosen, kind] { chosen = kind; });
    return s;
  };

  auto* classify = sub("classify", "Classify the growth integral of h", blowup::RunKind::Classify);
  classify->add_option("--h", o.h, "Nonlinearity, e.g. power(2)");
  classify->add_option("--n", o.n, "Order n = m - k");
  classify->add_option("--alpha", o.alpha, "Argument scaling (classifies h(alpha s))");

  auto* integ = sub("integrate", "Integrate the problem forward", blowup::RunKind::Integrate);
  integ->add_option("--T", o.T, "End time");
  integ->add_option("--csv", o.csv, "Trajectory CSV path");

  auto* detect = sub("detect-blowup", "Detect finite-time blow-up", blowup::RunKind::DetectBlowup);
  detect->add_option("--horizon", o.horizon, "Largest time to integrate to");
  detect->add_option("--thresholds", o.thresholds, "Escape levels")->delimiter(',');

  auto* construct = sub("construct", "Monotone Picard construction of the global solution",
                        blowup::RunKind::Construct);
  construct->add_option("--T", o.T, "End time");
  construct->add_option("--trials", o.trials, "Randomized bound-preservation trials");

  auto* majorize = sub("majorize", "Reparameterized majorization table", blowup::RunKind::Majorize);
  majorize->add_option("--J", o.J, "Number of levels");
  majorize->add_option("--rho", o.rho, "Level factor");
  majorize->add_option("--horizon", o.horizon, "Largest time to integrate to");

  auto* comparison = sub("verify-lemma22", "Check the comparison inequality for the autonomous majorant",
                    blowup::RunKind::VerifyComparison);
  comparison->add_option("--n", o.n, "Order n");
  comparison->add_option("--g", o.g, "Right-hand side g, e.g. power(1)");
  comparison->add_option("--u0", o.u0, "Initial value");
  comparison->add_option("--T", o.T, "End time");
  comparison->add_option("--grid", o.grid, "Number of grid points");

  auto* pipeline = sub("pipeline", "Classify, then construct or detect blow-up", blowup::RunKind::Pipeline);
  pipeline->add_option("--horizon", o.horizon, "Time span of the construction");

  std::vector<std::string> batch_configs;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* batch = app.add_subcommand("batch", "Run several configs concurrently, one output directory each");
  batch->add_option("configs", batch_configs, "Config files")->required()->check(CLI::ExistingFile);
  batch->add_option("--jobs", jobs, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : blowup::kExitError;
  }

  if (batch->parsed()) return run_batch(o, batch_configs, jobs);
  if (!chosen) return blowup::kExitError;
  return run_one(o, *chosen);
}
