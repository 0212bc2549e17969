#pragma once

// Global-existence construction for w^(m) = f with 0 <= f <= q(t) h(w^(k)):
// order reduction to u = w^(k), the monotone Picard construction of u, the
// lift back to w, the time-reparameterized majorization of u by an autonomous
// problem, and the end-to-end pipeline that combines them with classification
// and blow-up detection.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blowup/blowup_detection.hpp"
#include "blowup/classifier.hpp"
#include "blowup/function_model.hpp"
#include "blowup/ode_engine.hpp"
#include "blowup/picard.hpp"

namespace blowup {

/// u^(n) = q(t) h(u), u^(i)(0) = a_{k+i}, n = m - k.
struct ReducedProblem {
  int n = 1;
  std::vector<double> a_reduced;
  ScalarFn q = make_constant(1.0);
  ScalarFn h = make_power(1.0);

  ProblemSpec as_problem() const;
};

ReducedProblem reduce_problem(const ProblemSpec& p);

/// v = sum_{i<k} a_i t^i/i! + V_k[u], with v^(k+i) = u^(i). For k = 0 the
/// input is returned unchanged.
Trajectory lift_solution(const Trajectory& u, std::span<const double> a_low, int k);

struct MajorizationRow {
  int j = 0;
  double t_j = 0.0;
  double tau_j = 0.0;
  double eps_j = 0.0;
  std::vector<double> u_derivs;
  std::vector<double> w_derivs;
  /// min over i of w^(i)(tau_j) - u^(i)(t_j).
  double min_margin = 0.0;
};

struct MajorizationTable {
  std::vector<MajorizationRow> rows;
  double t0 = 0.0;
  double u_t0 = 0.0;
  double rho = 2.0;
  int levels_requested = 0;
  int levels_reached = 0;
  /// Fewer levels than requested were reached before the horizon.
  bool level_unreachable = false;
  bool passed = false;
};

struct MajorizationOptions {
  int levels = 8;
  double horizon = 50.0;
  /// Level factor: u(t_j) = rho^j u(t0) and w^(n) = h(rho w).
  double rho = 2.0;
  double tol = 1e-11;
};

/// Levels t_j of u^(n) = q h(u) from `a_reduced`, reparameterized times
/// tau_j = tau_{j-1} + (t_j - t_{j-1}) + int_{t_{j-1}}^{t_j} q, and the
/// margins of w^(n) = h(rho w), w^(i)(0) = b_i, over u at those times.
MajorizationTable majorization_experiment(const ScalarFn& q, const ScalarFn& h, int n,
                                          std::span<const double> a_reduced,
                                          std::span<const double> b,
                                          const MajorizationOptions& opts = {});

enum class PipelineVerdict { GlobalConstructed, BlowUpDetected, NoBlowUpObserved, Inconclusive };

std::string_view to_string(PipelineVerdict v);

struct PipelineOptions {
  /// Consistency between construction and direct integration is required to
  /// 100 * tol (scaled sup norm).
  double tol = 1e-7;
  /// Tolerance of the integrator and the Picard iteration.
  double solver_tol = 1e-10;
  PicardOptions picard;
  DetectOptions detect;
  MajorizationOptions majorization;
};

struct PipelineReport {
  ReducedProblem reduced;
  IntegralVerdict classification;
  PipelineVerdict verdict = PipelineVerdict::Inconclusive;
  std::string regime;
  /// Blow-up is only guaranteed for large data; set when max a_i < 1.
  bool small_data = false;
  double horizon = 0.0;

  // Global side.
  std::optional<Trajectory> constructed;
  std::optional<Trajectory> direct;
  int picard_iterations = 0;
  bool picard_converged = false;
  std::size_t picard_grid = 0;
  /// max |constructed - direct| over grid nodes and all components.
  std::optional<double> consistency_abs;
  /// Same, divided pointwise by 1 + |direct|.
  std::optional<double> consistency_scaled;
  bool consistent = false;
  /// With a general f: worst of max(-w^(i), w^(i) - v^(i)) for the direct
  /// solution w and the constructed majorant v.
  std::optional<double> sandwich_violation;
  std::optional<MajorizationTable> majorization;

  // Blow-up side.
  std::optional<BlowupReport> blowup;

  /// Failures of individual probes, prefixed with the stage name.
  std::vector<std::string> notes;

  /// False when a check that was run failed.
  bool checks_passed() const;
};

/// Reduce, classify, then construct (divergent integral) or detect blow-up
/// (convergent integral); an inconclusive classification runs both probes.
PipelineReport run_pipeline(const ProblemSpec& p, double horizon,
                            const PipelineOptions& opts = {});

}  // namespace blowup
