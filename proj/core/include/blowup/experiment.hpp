#pragma once

// Runs one configured experiment and writes its artifacts:
//   <out>/report.txt        flat key=value lines, then a human summary
//   <out>/trajectory.csv    t,w0,...            (integrate, construct, pipeline)
//   <out>/iterates.csv      j,t,v_j             (construct)
//   <out>/majorization.csv  j,t_j,tau_j,eps_j,margin_min (majorize, pipeline)
//   <out>/comparison.csv    t,lhs,rhs,slack     (verify-lemma22)
//   <out>/escapes.csv       threshold,t_escape  (detect-blowup, pipeline)

#include <string>
#include <utility>
#include <vector>

#include "blowup/config.hpp"
#include "blowup/ode_engine.hpp"

namespace blowup {

enum ExitStatus : int { kExitPass = 0, kExitVerdictFailure = 1, kExitError = 2 };

struct ExperimentOutcome {
  int exit_code = kExitPass;
  /// Ordered key=value pairs as written to report.txt.
  std::vector<std::pair<std::string, std::string>> fields;
  std::vector<std::string> summary;
  std::vector<std::string> files;

  /// Value of a report key, or "" when absent.
  std::string field(const std::string& key) const;
  std::string report_text() const;
};

/// Dispatches on cfg.run. Never throws for library errors: they become
/// exit status 2 with `status=error` in the report.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

/// `t,w0,...,w{m-1}` with a header row.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace blowup
