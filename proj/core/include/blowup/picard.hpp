#pragma once

// Constructive pieces of the global-existence argument:
//  * comparison constants (alpha, beta) for the inequality
//        u(t) - u(0) >= alpha int_0^t (t - tau)^{n-1} g(beta u) dtau
//    satisfied by solutions of d/dt u^{1/n} = g^{1/n}(u);
//  * the solution of that autonomous equation by quadrature inversion;
//  * the monotone Picard tower for v^(n) = h(v) and its majorant;
//  * the integral operator A whose fixed points solve w^(m) = f.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "blowup/function_model.hpp"
#include "blowup/ode_engine.hpp"

namespace blowup {

struct ComparisonConstants {
  int n = 1;
  double alpha = 0.25;
  double beta = 1.0 / 3.0;
};

/// alpha = 1/2^{n+1}, beta = 1/(1+2^n).
ComparisonConstants comparison_constants(int n);

/// Time needed by the autonomous solution to climb from u0 to U:
///     F(U) = (1/n) int_{u0}^{U} g(s)^{-1/n} s^{1/n-1} ds.
double autonomous_time(const ScalarFn& g, int n, double u0, double U);

struct AutonomousSolution {
  std::vector<double> t;
  std::vector<double> u;
  /// u'(t) = n u^{1-1/n} g(u)^{1/n}.
  std::vector<double> du;
  /// F(u(t)) - t as seen by the solver's own quadrature.
  std::vector<double> residual;
};

/// Solves d/dt u^{1/n} = g^{1/n}(u), u(0) = u0 at each target time by
/// bracketing and Brent root finding on F(U) = t. Throws FiniteEscape when U
/// runs off to infinity before the target time.
AutonomousSolution solve_autonomous_quadrature(const ScalarFn& g, int n, double u0,
                                               std::span<const double> t_targets);

struct ComparisonSlackReport {
  std::vector<double> grid;
  std::vector<double> lhs;  // u(t) - u(0)
  std::vector<double> rhs;  // alpha int_0^t (t - tau)^{n-1} g(beta u) dtau
  double min_slack = 0.0;
  /// min over the grid of (lhs - rhs) / (1 + |lhs|).
  double min_relative_slack = 0.0;
  bool passed = false;
};

ComparisonSlackReport verify_comparison_inequality(const ScalarFn& g, int n, double u0,
                                                   double T, std::size_t grid_size);

/// g(s) = h(s / beta) / (alpha (n-1)!), the right-hand side whose autonomous
/// solution majorizes the Picard iterates for v^(n) = h(v).
ScalarFn build_g_from_h(const ScalarFn& h, int n);

struct PicardOptions {
  /// Bound on the scaled sup-norm gap max |v_j - v_{j-1}| / (1 + |v_j|).
  double tol = 1e-10;
  /// Grid doubling stops once two refinements differ by less than
  /// grid_tol / 4 (scaled); 0 means use `tol`.
  double grid_tol = 0.0;
  int max_iter = 200;
  std::size_t initial_intervals = 128;
  std::size_t max_intervals = std::size_t{1} << 14;
};

struct PicardTower {
  std::vector<double> grid;
  /// v_0, v_1, ... on the grid.
  std::vector<std::vector<double>> iterates;
  /// Quadrature majorant u on the grid.
  std::vector<double> majorant;
  bool converged = false;
  int iterations = 0;
  double sup_gap = 0.0;
  /// Scaled difference between the last two grid refinements.
  double discretization_gap = 0.0;
  /// min over j, t of (v_j - v_{j-1}) / (1 + u) (>= -1e-12 for a monotone tower).
  double worst_monotonicity = 0.0;
  /// max over j, t of (v_j - u) / (1 + u) (<= 1e-12 when bounded by u).
  double worst_majorant_excess = 0.0;
  /// v and its derivatives up to order n-1 for the last iterate, top = v^(n).
  Trajectory solution;

  bool monotone() const { return worst_monotonicity >= -1e-12; }
  bool bounded() const { return worst_majorant_excess <= 1e-12; }
};

/// Picard iteration for v^(n) = h(v), v^(i)(0) = b_i > 0 on [0, T].
PicardTower picard_solve(const ScalarFn& h, int n, std::span<const double> b, double T,
                         const PicardOptions& opts = {});

/// Picard iteration for u^(n) = q(t) h(u), u^(i)(0) = data_i >= 0. The
/// majorant uses sup q on [0, T] and the strictly larger data `majorant_b`.
PicardTower picard_solve_reduced(const ScalarFn& q, const ScalarFn& h, int n,
                                 std::span<const double> data,
                                 std::span<const double> majorant_b, double T,
                                 const PicardOptions& opts = {});

/// A(u) and its derivatives:
///   d^i A(u)/dt^i = sum_{l < m-i} a_{i+l} t^l / l! + V_{m-i}[f(., u, ..., u^(m-1))].
/// `u` supplies the m state components on its grid; the result lives on the
/// same grid with top = f(t, u).
Trajectory apply_operator(const ProblemSpec& p, const Trajectory& u);

/// max over i, t of max(d^i A(u) - v^(i), -d^i A(u)); u and v must share a grid.
double operator_bound_violation(const ProblemSpec& p, const Trajectory& v, const Trajectory& u);

struct BoundPreservationReport {
  int trials = 0;
  double worst_violation = 0.0;
  int worst_trial = -1;
  bool passed = true;
};

/// Random admissible inputs 0 <= u^(i) <= v^(i) and f = c(t) q(t) h(x_k),
/// c in [0, 1]; checks 0 <= d^i A(u) <= v^(i) + 1e-9. `v` is resampled onto
/// a uniform grid of `grid_points` nodes through its dense output.
BoundPreservationReport verify_bound_preservation(const ProblemSpec& p, const Trajectory& v,
                                                  int trials, std::uint64_t seed,
                                                  std::size_t grid_points = 4001);

}  // namespace blowup
