#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "blowup/ode_engine.hpp"

namespace blowup {

enum class BlowupKind { GlobalUpToHorizon, BlowUp };

struct EscapeRecord {
  double threshold = 0.0;
  double time = 0.0;
};

struct BlowupReport {
  BlowupKind kind = BlowupKind::GlobalUpToHorizon;
  double horizon = 0.0;
  std::optional<double> t_blow_estimate;
  std::optional<std::pair<double, double>> t_blow_interval;
  std::vector<EscapeRecord> escape_thresholds;
  /// Time at which integration stopped (horizon, last threshold, or the
  /// escape/step-collapse event).
  double t_stop = 0.0;
  bool step_collapse = false;
};

struct DetectOptions {
  /// Levels M for w; the escape times t_M feed the extrapolation.
  std::vector<double> thresholds = {1e3, 1e6, 1e12, 1e24, 1e48, 1e96};
  double horizon = 100.0;
  double tol = 1e-10;
};

/// Aitken delta-squared limit of x0, x1, x2; falls back to x2 when the
/// differences do not shrink.
double aitken_limit(double x0, double x1, double x2);

/// Integrates w until every threshold has been escaped, the solution stops
/// being resolvable (step collapse / overflow, itself a blow-up signal), or
/// the horizon is reached. The blow-up time is extrapolated from the last
/// three recorded escape times.
BlowupReport detect_blowup(const ProblemSpec& p, const DetectOptions& opts = {});

}  // namespace blowup
