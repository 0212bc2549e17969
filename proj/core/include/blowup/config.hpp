#pragma once

// Line-oriented experiment configuration:
//
//   # comment
//   m = 2
//   k = 0
//   a = [1, 0]
//   q = constant(1)
//   h = power(1)
//   run = pipeline
//
// Unknown keys and repeated keys are errors.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blowup/function_model.hpp"
#include "blowup/ode_engine.hpp"

namespace blowup {

enum class RunKind { Classify, Integrate, DetectBlowup, Construct, Majorize, Pipeline, VerifyComparison };

std::string_view to_string(RunKind r);
std::optional<RunKind> parse_run_kind(std::string_view text);

struct ExperimentConfig {
  int m = 1;
  int k = 0;
  std::vector<double> a = {1.0};
  ScalarFn q = make_constant(1.0);
  ScalarFn h = make_power(1.0);
  RunKind run = RunKind::Pipeline;

  /// Order of the reduced problem; m - k when unset.
  std::optional<int> n;
  double T = 1.0;
  double tol = 1e-10;
  std::vector<double> thresholds = {1e3, 1e6, 1e12, 1e24, 1e48, 1e96};
  int J = 8;
  std::uint64_t seed = 0;
  double horizon = 5.0;
  double alpha = 1.0;
  double u0 = 1.0;
  /// Right-hand side of the autonomous comparison equation; derived from h when unset.
  std::optional<ScalarFn> g;
  /// Majorant data; a_{k+i} + 1 when unset.
  std::optional<std::vector<double>> b;
  int max_iter = 200;
  int grid = 200;
  double rho = 2.0;
  int trials = 100;
  std::string out = "out";
  /// Trajectory CSV path; `<out>/trajectory.csv` when unset.
  std::optional<std::string> csv;

  int reduced_order() const { return n.value_or(m - k); }
  std::vector<double> majorant_data() const;
  ProblemSpec problem() const;

  /// Function fields compare by their canonical text.
  bool operator==(const ExperimentConfig& other) const;
};

struct ConfigError {
  int line = 0;
  int column = 0;
  std::string key;
  std::string message;

  std::string to_string() const;
};

struct ConfigParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigError> errors;

  bool ok() const { return config.has_value(); }
};

ConfigParseResult parse_config(std::string_view text);

/// Semantic checks on a fully assembled config (also applied by parse_config).
std::vector<ConfigError> validate_config(const ExperimentConfig& cfg);

/// Canonical text; parse_config(emit_config(c)) yields a config equal to c.
std::string emit_config(const ExperimentConfig& cfg);

/// Reads and parses a file; throws InvalidParameter listing every error.
ExperimentConfig load_config(const std::string& path);

/// Parses `[x, y, ...]` (brackets optional).
std::optional<std::vector<double>> parse_double_list(std::string_view text);

}  // namespace blowup
