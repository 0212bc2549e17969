#pragma once

// Forward integration of w^(m) = f(t, w, ..., w^(m-1)), w^(i)(0) = a_i, as the
// first-order system y_i' = y_{i+1} (i < m-1), y_{m-1}' = f(t, y).

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "blowup/function_model.hpp"

namespace blowup {

using RhsFn = std::function<double(double t, std::span<const double> state)>;

struct ProblemSpec {
  int m = 1;
  int k = 0;
  std::vector<double> a;
  ScalarFn q = make_constant(1.0);
  ScalarFn h = make_power(1.0);
  /// General right-hand side; must satisfy 0 <= f <= q(t) h(x_k).
  RhsFn f_override;

  /// Throws InvalidParameter on a broken contract. Samples f_override against
  /// its bound at a fixed deterministic set of points.
  void validate() const;

  /// q(t) h(x_k) with x_k clamped at 0 (stage values of an explicit scheme
  /// can dip below the nonnegative solution by rounding).
  double majorant_rhs(double t, std::span<const double> state) const;
  double rhs(double t, std::span<const double> state) const;

  /// Same problem with f_override dropped: v^(m) = q(t) h(v^(k)).
  ProblemSpec majorant_problem() const;
};

/// Time grid with the state (w, ..., w^(m-1)) at each node, the top
/// derivative w^(m) at each node, and a dense-output evaluator.
class Trajectory {
 public:
  /// Piecewise polynomial continuation for one step, per component: value at
  /// t_i + theta * h is sum_r coeff[r] theta^r.
  using StepPoly = std::array<double, 5>;

  Trajectory() = default;
  /// Sampled trajectory interpolated by cubic Hermite between nodes.
  Trajectory(std::vector<double> grid, std::vector<double> values, std::vector<double> top,
             int order, double tol = 0.0);

  std::size_t size() const noexcept { return grid_.size(); }
  int order() const noexcept { return order_; }
  double tolerance() const noexcept { return tol_; }
  const std::vector<double>& grid() const noexcept { return grid_; }
  double time(std::size_t i) const { return grid_[i]; }
  double t_end() const { return grid_.back(); }
  double value(std::size_t i, int component) const {
    return values_[i * static_cast<std::size_t>(order_) + static_cast<std::size_t>(component)];
  }
  std::span<const double> state(std::size_t i) const {
    return {values_.data() + i * static_cast<std::size_t>(order_),
            static_cast<std::size_t>(order_)};
  }
  double top(std::size_t i) const { return top_[i]; }
  /// Samples of one component (component == order() gives the top derivative).
  std::vector<double> component(int component) const;

  /// Dense output inside [0, t_end()].
  double eval(double t, int component) const;
  std::vector<double> eval_state(double t) const;

  bool has_step_polys() const noexcept { return !polys_.empty(); }

  /// Used by the integrator to attach its continuous extension.
  void append_node(double t, std::span<const double> y, double top);
  void append_step_polys(std::span<const StepPoly> polys);
  void set_tolerance(double tol) { tol_ = tol; }

 private:
  std::size_t segment(double t) const;

  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<double> top_;
  std::vector<StepPoly> polys_;  // (size()-1) * order entries when present
  int order_ = 0;
  double tol_ = 0.0;
};

enum class BlowupReason { Escape, StepCollapse };

struct BlowupEvent {
  Trajectory partial;
  /// Escape: time the first component crossed the escape threshold;
  /// StepCollapse: time the step size fell below the minimum.
  double t_escape = 0.0;
  BlowupReason reason = BlowupReason::Escape;
};

struct IntegrateOptions {
  double escape_threshold = 1e12;
  double min_step_factor = 1e-13;
  std::size_t max_steps = 2'000'000;
  /// Times the integrator must land on exactly (besides q's breakpoints).
  std::vector<double> stop_times;
  /// Checked after each accepted step; returning true ends the integration
  /// with a Trajectory that stops at that step.
  std::function<bool(double t, std::span<const double> y)> stop_when;
};

using IntegrationResult = std::variant<Trajectory, BlowupEvent>;

/// Adaptive Dormand-Prince 5(4) with PI step control; tol is used as both
/// absolute and relative tolerance. Throws NumericFailure if f is not finite
/// at an accepted state.
IntegrationResult integrate(const ProblemSpec& p, double T, double tol,
                            const IntegrateOptions& opts = {});

/// Generic system form used by the problem-level overload.
struct OdeSystem {
  int dim = 1;
  /// dy = F(t, y); dy has dim entries.
  std::function<void(double t, std::span<const double> y, std::span<double> dy)> rhs;
  /// Jump locations of the right-hand side in t.
  std::vector<double> breakpoints;
};

IntegrationResult integrate_system(const OdeSystem& sys, std::span<const double> y0,
                                   double T, double tol, const IntegrateOptions& opts = {});

OdeSystem make_system(const ProblemSpec& p);

/// First time in the trajectory where `component` reaches `level` (located on
/// the dense output), or nullopt when it never does.
std::optional<double> first_crossing(const Trajectory& traj, int component, double level);

}  // namespace blowup
