#include "blowup/ode_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "blowup/error.hpp"
#include "blowup/format.hpp"

namespace blowup {

// ---------------------------------------------------------------------------
// ProblemSpec

void ProblemSpec::validate() const {
  if (m < 1) throw InvalidParameter("order m must be >= 1");
  if (k < 0 || k > m - 1) throw InvalidParameter("k must satisfy 0 <= k <= m-1");
  if (a.size() != static_cast<std::size_t>(m)) {
    throw InvalidParameter("initial data must have m = " + std::to_string(m) + " values");
  }
  for (double ai : a) {
    if (!std::isfinite(ai) || ai < 0.0) {
      throw InvalidParameter("initial values must be finite and >= 0");
    }
  }
  if (!f_override) return;

  // Deterministic spot check of 0 <= f <= q h(x_k).
  std::uint64_t state = 0x9E3779B97F4A7C15ull;
  auto next_unit = [&state] {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  constexpr std::array<double, 6> kLevels = {0.0, 0.25, 1.0, 3.0, 10.0, 100.0};
  std::vector<double> x(static_cast<std::size_t>(m));
  for (int trial = 0; trial < 64; ++trial) {
    const double t = 10.0 * next_unit();
    for (double& xi : x) xi = kLevels[static_cast<std::size_t>(next_unit() * kLevels.size())];
    const double f = f_override(t, x);
    const double bound = majorant_rhs(t, x);
    if (!(f >= 0.0) || f > bound + 1e-12 * (1.0 + std::abs(bound))) {
      throw InvalidParameter("f_override violates 0 <= f <= q(t) h(x_k) at t=" +
                             format_double(t));
    }
  }
}

double ProblemSpec::majorant_rhs(double t, std::span<const double> state) const {
  const double xk = std::max(0.0, state[static_cast<std::size_t>(k)]);
  return q(t) * h(xk);
}

double ProblemSpec::rhs(double t, std::span<const double> state) const {
  if (f_override) return f_override(t, state);
  return majorant_rhs(t, state);
}

ProblemSpec ProblemSpec::majorant_problem() const {
  ProblemSpec out = *this;
  out.f_override = nullptr;
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::vector<double> grid, std::vector<double> values,
                       std::vector<double> top, int order, double tol)
    : grid_(std::move(grid)), values_(std::move(values)), top_(std::move(top)),
      order_(order), tol_(tol) {
  if (order_ < 1) throw InvalidParameter("trajectory order must be >= 1");
  const std::size_t n = grid_.size();
  if (n == 0 || values_.size() != n * static_cast<std::size_t>(order_) || top_.size() != n) {
    throw InvalidParameter("trajectory arrays have inconsistent sizes");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(grid_[i] > grid_[i - 1])) throw InvalidParameter("trajectory grid must increase");
  }
  polys_.reserve((n - 1) * static_cast<std::size_t>(order_));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = grid_[i + 1] - grid_[i];
    for (int c = 0; c < order_; ++c) {
      const double f0 = value(i, c);
      const double f1 = value(i + 1, c);
      const double d0 = c + 1 < order_ ? value(i, c + 1) : top_[i];
      const double d1 = c + 1 < order_ ? value(i + 1, c + 1) : top_[i + 1];
      const double delta = f1 - f0;
      polys_.push_back({f0, h * d0, 3.0 * delta - 2.0 * h * d0 - h * d1,
                        -2.0 * delta + h * d0 + h * d1, 0.0});
    }
  }
}

std::vector<double> Trajectory::component(int c) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = c == order_ ? top_[i] : value(i, c);
  return out;
}

void Trajectory::append_node(double t, std::span<const double> y, double top) {
  if (order_ == 0) order_ = static_cast<int>(y.size());
  grid_.push_back(t);
  values_.insert(values_.end(), y.begin(), y.end());
  top_.push_back(top);
}

void Trajectory::append_step_polys(std::span<const StepPoly> polys) {
  polys_.insert(polys_.end(), polys.begin(), polys.end());
}

std::size_t Trajectory::segment(double t) const {
  auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  std::size_t idx = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  return std::min(idx, size() - 2);
}

double Trajectory::eval(double t, int c) const {
  if (size() == 0) throw InvalidParameter("empty trajectory");
  const double span = t_end() - grid_.front();
  const double slack = 1e-12 * std::max(1.0, std::abs(t_end()));
  if (t < grid_.front() - slack || t > t_end() + slack) {
    throw InvalidParameter("dense output requested outside the trajectory span at t=" +
                           format_double(t));
  }
  if (size() == 1 || span == 0.0) return c == order_ ? top_[0] : value(0, c);
  t = std::clamp(t, grid_.front(), t_end());
  const std::size_t i = segment(t);
  const double h = grid_[i + 1] - grid_[i];
  const double theta = (t - grid_[i]) / h;
  if (c == order_) {
    // Derivative of the top stored component.
    const StepPoly& p = polys_[i * static_cast<std::size_t>(order_) +
                               static_cast<std::size_t>(order_ - 1)];
    return (p[1] + theta * (2.0 * p[2] + theta * (3.0 * p[3] + theta * 4.0 * p[4]))) / h;
  }
  const StepPoly& p = polys_[i * static_cast<std::size_t>(order_) + static_cast<std::size_t>(c)];
  return p[0] + theta * (p[1] + theta * (p[2] + theta * (p[3] + theta * p[4])));
}

std::vector<double> Trajectory::eval_state(double t) const {
  std::vector<double> out(static_cast<std::size_t>(order_));
  for (int c = 0; c < order_; ++c) out[static_cast<std::size_t>(c)] = eval(t, c);
  return out;
}

std::optional<double> first_crossing(const Trajectory& traj, int component, double level) {
  if (traj.size() == 0) return std::nullopt;
  if (traj.value(0, component) >= level) return traj.time(0);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    if (traj.value(i + 1, component) < level) continue;
    double lo = traj.time(i);
    double hi = traj.time(i + 1);
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (traj.eval(mid, component) >= level) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension (Hairer & Wanner, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafe = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kGrowMax = 5.0;   // h_new / h <= 5
constexpr double kShrinkMax = 0.1; // h_new / h >= 0.1

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Local errors add up roughly linearly over the run; aiming each step two
// digits below the requested tolerance keeps the global error near it.
constexpr double kLocalTolFactor = 1e-2;
constexpr double kLocalTolFloor = 1e-15;

class DormandPrince {
 public:
  DormandPrince(const OdeSystem& sys, double tol)
      : sys_(sys), tol_(std::max(tol * kLocalTolFactor, kLocalTolFloor)), dim_(static_cast<std::size_t>(sys.dim)) {
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_, &err_}) {
      v->assign(dim_, 0.0);
    }
  }

  void derivative(double t, std::span<const double> y, std::vector<double>& out) const {
    sys_.rhs(t, y, out);
  }

  // One trial step of length h from (t, y) with k1 = F(t, y) precomputed in k1_.
  // Returns the scaled error norm, or +inf when a stage is not finite.
  double trial(double t, std::span<const double> y, double h) {
    auto stage = [&](std::initializer_list<std::pair<double, const std::vector<double>*>> terms) {
      for (std::size_t i = 0; i < dim_; ++i) {
        double acc = 0.0;
        for (const auto& [coef, k] : terms) acc += coef * (*k)[i];
        ytmp_[i] = y[i] + h * acc;
      }
    };
    stage({{a21, &k1_}});
    derivative(t + c2 * h, ytmp_, k2_);
    stage({{a31, &k1_}, {a32, &k2_}});
    derivative(t + c3 * h, ytmp_, k3_);
    stage({{a41, &k1_}, {a42, &k2_}, {a43, &k3_}});
    derivative(t + c4 * h, ytmp_, k4_);
    stage({{a51, &k1_}, {a52, &k2_}, {a53, &k3_}, {a54, &k4_}});
    derivative(t + c5 * h, ytmp_, k5_);
    stage({{a61, &k1_}, {a62, &k2_}, {a63, &k3_}, {a64, &k4_}, {a65, &k5_}});
    derivative(t + h, ytmp_, k6_);
    for (std::size_t i = 0; i < dim_; ++i) {
      ynew_[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] +
                             a76 * k6_[i]);
    }
    derivative(t + h, ynew_, k7_);
    if (!all_finite(k2_) || !all_finite(k3_) || !all_finite(k4_) || !all_finite(k5_) ||
        !all_finite(k6_) || !all_finite(k7_) || !all_finite(ynew_)) {
      return std::numeric_limits<double>::infinity();
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      err_[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                     e7 * k7_[i]);
      const double sk = tol_ + tol_ * std::max(std::abs(y[i]), std::abs(ynew_[i]));
      sum += (err_[i] / sk) * (err_[i] / sk);
    }
    return std::sqrt(sum / static_cast<double>(dim_));
  }

  void step_polys(std::span<const double> y, double h, std::vector<Trajectory::StepPoly>& out) const {
    out.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      const double ydiff = ynew_[i] - y[i];
      const double bspl = h * k1_[i] - ydiff;
      const double r1 = y[i];
      const double r2 = ydiff;
      const double r3 = bspl;
      const double r4 = ydiff - h * k7_[i] - bspl;
      const double r5 = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] +
                             d6 * k6_[i] + d7 * k7_[i]);
      // r1 + th (r2 + (1-th)(r3 + th (r4 + (1-th) r5))) in monomials of th.
      out[i] = {r1, r2 + r3, -r3 + r4 + r5, -r4 - 2.0 * r5, r5};
    }
  }

  double initial_step(double t, std::span<const double> y, double t_end) {
    auto norm = [&](const std::vector<double>& v) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) {
        const double sk = tol_ + tol_ * std::abs(y[i]);
        s += (v[i] / sk) * (v[i] / sk);
      }
      return std::sqrt(s / static_cast<double>(dim_));
    };
    std::vector<double> yv(y.begin(), y.end());
    const double dnf = norm(k1_);
    const double dny = norm(yv);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min(h, t_end - t);
    for (std::size_t i = 0; i < dim_; ++i) ytmp_[i] = y[i] + h * k1_[i];
    derivative(t + h, ytmp_, k2_);
    if (!all_finite(k2_)) return std::max(1e-10, 1e-3 * h);
    for (std::size_t i = 0; i < dim_; ++i) err_[i] = (k2_[i] - k1_[i]) / h;
    const double der2 = norm(err_);
    const double der12 = std::max(der2, dnf);
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, t_end - t});
  }

  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, err_;

 private:
  const OdeSystem& sys_;
  double tol_;
  std::size_t dim_;
};

}  // namespace

OdeSystem make_system(const ProblemSpec& p) {
  OdeSystem sys;
  sys.dim = p.m;
  const int m = p.m;
  sys.rhs = [p, m](double t, std::span<const double> y, std::span<double> dy) {
    for (int i = 0; i + 1 < m; ++i) dy[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i) + 1];
    dy[static_cast<std::size_t>(m - 1)] = p.rhs(t, y);
  };
  sys.breakpoints = p.q.breakpoints();
  return sys;
}

IntegrationResult integrate_system(const OdeSystem& sys, std::span<const double> y0,
                                   double T, double tol, const IntegrateOptions& opts) {
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidParameter("T must be positive and finite");
  if (!(tol > 1e-14 && tol < 1e-2)) throw InvalidParameter("tol must lie in (1e-14, 1e-2)");
  if (y0.size() != static_cast<std::size_t>(sys.dim)) {
    throw InvalidParameter("initial state has the wrong dimension");
  }
  const std::size_t dim = y0.size();

  // Mandatory landing points: jumps of the right-hand side, requested stops, T.
  std::vector<double> landings;
  for (double b : sys.breakpoints) {
    if (b > 0.0 && b < T) landings.push_back(b);
  }
  for (double s : opts.stop_times) {
    if (s > 0.0 && s < T) landings.push_back(s);
  }
  landings.push_back(T);
  std::sort(landings.begin(), landings.end());
  landings.erase(std::unique(landings.begin(), landings.end()), landings.end());

  DormandPrince dp(sys, tol);
  Trajectory traj;
  traj.set_tolerance(tol);
  std::vector<double> y(y0.begin(), y0.end());
  double t = 0.0;

  auto eval_k1 = [&] {
    dp.derivative(t, y, dp.k1_);
    if (!all_finite(dp.k1_)) {
      throw NumericFailure(t, "right-hand side is not finite at t=" + format_double(t));
    }
  };
  eval_k1();
  traj.append_node(t, y, dp.k1_[dim - 1]);

  std::size_t next_landing = 0;
  double h = dp.initial_step(t, y, landings.front());
  double fac_old = 1e-4;
  bool last_rejected = false;
  std::vector<Trajectory::StepPoly> polys;

  bool nonfinite_trial = false;
  auto collapse = [&](double at) -> IntegrationResult {
    // Shrinking onto a point where f itself is not finite is a defect of f,
    // not a singularity of the solution.
    if (nonfinite_trial) {
      throw NumericFailure(at, "right-hand side is not finite just past t=" + format_double(at));
    }
    return BlowupEvent{std::move(traj), at, BlowupReason::StepCollapse};
  };

  for (std::size_t steps = 0;; ++steps) {
    if (steps >= opts.max_steps) {
      throw NumericFailure(t, "step budget exhausted at t=" + format_double(t));
    }
    const double landing = landings[next_landing];
    const double h_min = opts.min_step_factor * std::max(1.0, std::abs(t));
    bool clipped = false;
    if (t + h >= landing - h_min) {
      h = landing - t;
      clipped = true;
    }
    if (h < h_min && !clipped) return collapse(t);

    const double err = dp.trial(t, y, h);
    nonfinite_trial = !std::isfinite(err);
    if (!(err <= 1.0)) {
      // Rejected (or non-finite stage).
      const double shrink = std::isfinite(err)
                                ? std::max(kShrinkMax, std::min(1.0, kSafe / std::pow(err, kExpo)))
                                : 0.25;
      h *= last_rejected ? std::min(shrink, 0.5) : shrink;
      last_rejected = true;
      if (h < h_min) return collapse(t);
      continue;
    }

    dp.step_polys(y, h, polys);
    const double t_new = clipped ? landing : t + h;
    std::swap(y, dp.ynew_);
    t = t_new;
    if (clipped) {
      ++next_landing;
      eval_k1();
    } else {
      std::swap(dp.k1_, dp.k7_);
      if (!all_finite(dp.k1_)) {
        throw NumericFailure(t, "right-hand side is not finite at t=" + format_double(t));
      }
    }
    traj.append_node(t, y, dp.k1_[dim - 1]);
    traj.append_step_polys(polys);

    // Step size for the next step (PI control).
    const double fac11 = std::pow(std::max(err, 1e-16), kExpo);
    double fac = fac11 / std::pow(fac_old, kBeta);
    fac = std::clamp(fac / kSafe, 1.0 / kGrowMax, 1.0 / kShrinkMax);
    double h_next = h / fac;
    if (last_rejected) h_next = std::min(h_next, h);
    fac_old = std::max(err, 1e-4);
    last_rejected = false;

    // Escape above the threshold on any component.
    double escape_at = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < dim; ++c) {
      if (std::abs(y[c]) > opts.escape_threshold) {
        if (auto tc = first_crossing(traj, static_cast<int>(c), opts.escape_threshold)) {
          escape_at = std::min(escape_at, *tc);
        } else {
          escape_at = std::min(escape_at, t);
        }
      }
    }
    if (std::isfinite(escape_at)) {
      return BlowupEvent{std::move(traj), escape_at, BlowupReason::Escape};
    }
    if (opts.stop_when && opts.stop_when(t, y)) return traj;
    if (next_landing == landings.size()) return traj;
    h = h_next;
  }
}

IntegrationResult integrate(const ProblemSpec& p, double T, double tol,
                            const IntegrateOptions& opts) {
  p.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidParameter("T must be positive and finite");
  if (!(tol > 1e-14 && tol < 1e-2)) throw InvalidParameter("tol must lie in (1e-14, 1e-2)");

  // Zero data with h(0) = 0 forces f = 0: the zero function solves the problem.
  const bool zero_data = std::all_of(p.a.begin(), p.a.end(), [](double v) { return v == 0.0; });
  if (zero_data && p.h(0.0) == 0.0) {
    std::vector<double> grid{0.0};
    for (double s : opts.stop_times) {
      if (s > 0.0 && s < T) grid.push_back(s);
    }
    grid.push_back(T);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const std::size_t n = grid.size();
    return Trajectory(std::move(grid), std::vector<double>(n * static_cast<std::size_t>(p.m), 0.0),
                      std::vector<double>(n, 0.0), p.m, tol);
  }
  const OdeSystem sys = make_system(p);
  return integrate_system(sys, p.a, T, tol, opts);
}

}  // namespace blowup
