#include "blowup/blowup_detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blowup/error.hpp"

namespace blowup {

double aitken_limit(double x0, double x1, double x2) {
  const double d1 = x1 - x0;
  const double d2 = x2 - x1;
  const double dd = d2 - d1;
  // Only accelerate sequences whose increments shrink.
  if (!(std::abs(d2) < std::abs(d1)) || dd == 0.0) return x2;
  const double limit = x2 - d2 * d2 / dd;
  return std::isfinite(limit) ? limit : x2;
}

BlowupReport detect_blowup(const ProblemSpec& p, const DetectOptions& opts) {
  if (opts.thresholds.empty()) throw InvalidParameter("at least one threshold is required");
  for (std::size_t i = 0; i < opts.thresholds.size(); ++i) {
    if (!(opts.thresholds[i] >= 10.0)) throw InvalidParameter("thresholds must be >= 10");
    if (i > 0 && !(opts.thresholds[i] > opts.thresholds[i - 1])) {
      throw InvalidParameter("thresholds must be strictly increasing");
    }
  }
  if (!(opts.horizon > 0.0)) throw InvalidParameter("horizon must be > 0");

  const double top_level = opts.thresholds.back();
  IntegrateOptions io;
  io.escape_threshold = std::numeric_limits<double>::max();
  io.stop_when = [top_level](double, std::span<const double> y) { return y[0] >= top_level; };

  BlowupReport report;
  report.horizon = opts.horizon;

  auto result = integrate(p, opts.horizon, opts.tol, io);
  const Trajectory* traj = nullptr;
  bool event = false;
  if (auto* ev = std::get_if<BlowupEvent>(&result)) {
    traj = &ev->partial;
    event = true;
    report.step_collapse = ev->reason == BlowupReason::StepCollapse;
    report.t_stop = ev->t_escape;
  } else {
    traj = &std::get<Trajectory>(result);
    report.t_stop = traj->t_end();
  }

  for (double level : opts.thresholds) {
    auto tc = first_crossing(*traj, 0, level);
    if (!tc) break;
    if (!report.escape_thresholds.empty() && *tc < report.escape_thresholds.back().time) {
      throw InternalConsistency("escape times decrease with the threshold");
    }
    report.escape_thresholds.push_back({level, *tc});
  }

  const bool all_escaped = report.escape_thresholds.size() == opts.thresholds.size();
  if (!all_escaped && !event) {
    report.kind = BlowupKind::GlobalUpToHorizon;
    return report;
  }

  report.kind = BlowupKind::BlowUp;
  if (report.escape_thresholds.empty()) {
    // Lost resolution below the first threshold: record where it happened.
    report.escape_thresholds.push_back({traj->value(traj->size() - 1, 0), report.t_stop});
  }
  const auto& esc = report.escape_thresholds;
  const double t_last = esc.back().time;
  double estimate = t_last;
  if (esc.size() >= 3) {
    estimate = aitken_limit(esc[esc.size() - 3].time, esc[esc.size() - 2].time, t_last);
  }
  if (event) estimate = std::max(estimate, report.t_stop);
  estimate = std::max(estimate, t_last);
  const double margin =
      std::max(estimate - t_last, 16.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(1.0, std::abs(estimate)));
  report.t_blow_estimate = estimate;
  report.t_blow_interval = std::make_pair(t_last, estimate + margin);
  return report;
}

}  // namespace blowup
