#include "blowup/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <string>

#include "blowup/error.hpp"
#include "blowup/format.hpp"
#include "blowup/quadrature.hpp"
#include "blowup/volterra.hpp"

namespace blowup {

ComparisonConstants comparison_constants(int n) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  return {n, std::ldexp(1.0, -(n + 1)), 1.0 / (1.0 + std::ldexp(1.0, n))};
}

ScalarFn build_g_from_h(const ScalarFn& h, int n) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  // 1/beta = 1 + 2^n and 1/alpha = 2^{n+1} are exact in binary.
  const double inv_beta = 1.0 + std::ldexp(1.0, n);
  const double value_scale = std::ldexp(1.0, n + 1) / factorial(n - 1);
  return h.scaled_argument(inv_beta).scaled_value(value_scale);
}

// ---------------------------------------------------------------------------
// Quadrature inversion

namespace {

constexpr double kMaxLogU = 709.0;  // e^709 is still a finite double

// Integrand of F in x = log s: (1/n) g(e^x)^{-1/n} e^{x/n}.
auto log_space_integrand(const ScalarFn& g, int n) {
  const double inv_n = 1.0 / n;
  return [&g, n, inv_n](double x) {
    const double s = std::exp(x);
    const double gs = g(s);
    if (!(gs > 0.0)) {
      throw SingularIntegrand(s, "g(s) <= 0 at s=" + format_double(s));
    }
    if (n == 1) return s / gs;
    return inv_n * std::exp(inv_n * (x - std::log(gs)));
  };
}

double segment_integral(const quad::Integrand& f, double x0, double x1) {
  if (x1 == x0) return 0.0;
  const quad::QuadOptions qo{0.0, 1e-13, 4000};
  if (x1 < x0) return -quad::gauss_kronrod(f, x1, x0, qo).value;
  return quad::gauss_kronrod(f, x0, x1, qo).value;
}

// Brent's method for a sign change of `fn` on [a, b] with fa < 0 <= fb.
template <typename Fn>
double brent_root(Fn&& fn, double a, double b, double fa, double fb, double ftol) {
  if (fa > 0.0 || fb < 0.0) throw BracketFailure("root is not bracketed");
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || std::abs(fb) <= ftol) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = fn(b);
  }
  return b;
}

}  // namespace

double autonomous_time(const ScalarFn& g, int n, double u0, double U) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  if (!(u0 > 0.0) || !(U > 0.0)) throw InvalidParameter("u0 and U must be > 0");
  const auto f = log_space_integrand(g, n);
  return segment_integral(f, std::log(u0), std::log(U));
}

AutonomousSolution solve_autonomous_quadrature(const ScalarFn& g, int n, double u0,
                                               std::span<const double> t_targets) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  if (!(u0 > 0.0) || !std::isfinite(u0)) throw InvalidParameter("u0 must be positive");
  if (!(g(u0) > 0.0)) throw InvalidParameter("g must be positive at u0");
  for (double t : t_targets) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParameter("targets must be >= 0");
  }
  const auto f = log_space_integrand(g, n);

  std::vector<std::size_t> order(t_targets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return t_targets[i] < t_targets[j]; });

  AutonomousSolution out;
  out.t.assign(t_targets.begin(), t_targets.end());
  out.u.assign(t_targets.size(), u0);
  out.du.assign(t_targets.size(), 0.0);
  out.residual.assign(t_targets.size(), 0.0);

  double x_cur = std::log(u0);
  double f_cur = 0.0;  // F at exp(x_cur)
  for (std::size_t idx : order) {
    const double target = t_targets[idx];
    if (target > f_cur) {
      // Grow a bracket [x_lo, x_hi] with F(x_lo) < target <= F(x_hi).
      double x_lo = x_cur, f_lo = f_cur;
      double step = 0.25;
      double x_hi = x_cur, f_hi = f_cur;
      while (true) {
        x_hi = std::min(x_lo + step, kMaxLogU);
        f_hi = f_lo + segment_integral(f, x_lo, x_hi);
        if (f_hi >= target) break;
        if (x_hi >= kMaxLogU) {
          throw FiniteEscape(f_hi, "autonomous majorant escapes to infinity near t=" +
                                       format_double(f_hi) + " before t=" +
                                       format_double(target));
        }
        x_lo = x_hi;
        f_lo = f_hi;
        step *= 2.0;
      }
      const double base_x = x_lo, base_f = f_lo;
      auto residual = [&](double x) { return base_f + segment_integral(f, base_x, x) - target; };
      const double ftol = 1e-14 * std::max(1.0, target);
      const double root =
          brent_root(residual, x_lo, x_hi, f_lo - target, f_hi - target, ftol);
      x_cur = root;
      f_cur = base_f + segment_integral(f, base_x, root);
    }
    const double u = std::exp(x_cur);
    out.u[idx] = u;
    out.residual[idx] = f_cur - target;
    out.du[idx] = n * std::pow(u, 1.0 - 1.0 / n) * std::pow(g(u), 1.0 / n);
  }
  return out;
}

ComparisonSlackReport verify_comparison_inequality(const ScalarFn& g, int n, double u0,
                                                   double T, std::size_t grid_size) {
  if (!(T > 0.0)) throw InvalidParameter("T must be > 0");
  if (grid_size < 2) throw InvalidParameter("grid_size must be >= 2");
  const auto consts = comparison_constants(n);

  ComparisonSlackReport report;
  report.grid.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    report.grid[i] = T * static_cast<double>(i) / static_cast<double>(grid_size - 1);
  }
  const auto sol = solve_autonomous_quadrature(g, n, u0, report.grid);

  std::vector<double> phi(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) phi[i] = g(consts.beta * sol.u[i]);
  const auto v = weighted_volterra(phi, n, report.grid);
  const double scale = consts.alpha * factorial(n - 1);

  report.lhs.resize(grid_size);
  report.rhs.resize(grid_size);
  report.min_slack = std::numeric_limits<double>::infinity();
  report.min_relative_slack = std::numeric_limits<double>::infinity();
  report.passed = true;
  for (std::size_t i = 0; i < grid_size; ++i) {
    report.lhs[i] = sol.u[i] - u0;
    report.rhs[i] = scale * v[i];
    const double slack = report.lhs[i] - report.rhs[i];
    const double rel = slack / (1.0 + std::abs(report.lhs[i]));
    report.min_slack = std::min(report.min_slack, slack);
    report.min_relative_slack = std::min(report.min_relative_slack, rel);
    if (rel < -1e-9) report.passed = false;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Picard tower

namespace {

struct GridRun {
  std::vector<double> grid;
  std::vector<std::vector<double>> iterates;
  std::vector<double> majorant;
  bool converged = false;
  double sup_gap = 0.0;
  double worst_monotonicity = std::numeric_limits<double>::infinity();
  double worst_majorant_excess = -std::numeric_limits<double>::infinity();
};

struct TowerProblem {
  const ScalarFn* q = nullptr;  // null means q = 1
  const ScalarFn& h;
  int n;
  std::span<const double> data;
  ScalarFn g;
  double majorant_u0;
};

// Starting from v = 0 puts h's origin, where it may be only Holder (sqrt),
// under the first intervals; a cubic grading restores fourth order there.
constexpr double kZeroStartGrading = 3.0;

// Nodes T (i/N)^r plus the coefficient's jump locations inside (0, T). Node
// values are computed so that every coarse grid is a subset of its refinement.
std::vector<double> tower_grid(const TowerProblem& tp, double T, std::size_t intervals) {
  const bool graded = !tp.data.empty() && tp.data[0] == 0.0;
  std::vector<double> grid(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(intervals);
    grid[i] = T * (graded ? std::pow(x, kZeroStartGrading) : x);
  }
  if (tp.q) {
    for (double b : tp.q->breakpoints()) {
      if (b > 0.0 && b < T) grid.push_back(b);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }
  return grid;
}

// q at the nodes and, where q jumps, its left limit.
struct Coefficients {
  std::vector<double> right;
  std::vector<double> left;  // empty when q is continuous on the grid
};

Coefficients coefficients(const TowerProblem& tp, std::span<const double> grid) {
  Coefficients c;
  c.right.assign(grid.size(), 1.0);
  if (!tp.q) return c;
  for (std::size_t i = 0; i < grid.size(); ++i) c.right[i] = (*tp.q)(grid[i]);
  const auto& breaks = tp.q->breakpoints();
  if (breaks.empty()) return c;
  c.left = c.right;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::binary_search(breaks.begin(), breaks.end(), grid[i])) {
      c.left[i] = (*tp.q)(std::nextafter(grid[i], 0.0));
    }
  }
  return c;
}

void integrand(const TowerProblem& tp, const Coefficients& coef, std::span<const double> v,
               std::span<const double> grid, std::vector<double>& phi,
               std::vector<double>& phi_left) {
  const std::size_t n_nodes = grid.size();
  phi.resize(n_nodes);
  phi_left.clear();
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double hv = tp.h(std::max(0.0, v[i]));
    phi[i] = coef.right[i] * hv;
    if (!std::isfinite(phi[i])) {
      throw NumericFailure(grid[i], "nonlinearity is not finite along the iterate");
    }
  }
  if (coef.left.empty()) return;
  phi_left.resize(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) phi_left[i] = coef.left[i] * tp.h(std::max(0.0, v[i]));
}

GridRun run_on_grid(const TowerProblem& tp, double T, std::size_t intervals,
                    const PicardOptions& opts) {
  GridRun run;
  run.grid = tower_grid(tp, T, intervals);
  const std::size_t n_nodes = run.grid.size();
  run.majorant = solve_autonomous_quadrature(tp.g, tp.n, tp.majorant_u0, run.grid).u;

  std::vector<double> poly(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) poly[i] = taylor_polynomial(tp.data, run.grid[i]);
  const Coefficients coef = coefficients(tp, run.grid);

  auto check_against = [&](const std::vector<double>& v, const std::vector<double>* prev) {
    for (std::size_t i = 0; i < n_nodes; ++i) {
      const double scale = 1.0 + run.majorant[i];
      run.worst_majorant_excess =
          std::max(run.worst_majorant_excess, (v[i] - run.majorant[i]) / scale);
      if (prev) {
        run.worst_monotonicity = std::min(run.worst_monotonicity, (v[i] - (*prev)[i]) / scale);
      }
    }
  };

  run.iterates.push_back(poly);
  check_against(poly, nullptr);
  std::vector<double> phi, phi_left;
  for (int j = 1; j <= opts.max_iter; ++j) {
    const auto& prev = run.iterates.back();
    integrand(tp, coef, prev, run.grid, phi, phi_left);
    const auto vol = weighted_volterra(phi, tp.n, run.grid, {}, phi_left);
    std::vector<double> next(n_nodes);
    double gap = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      next[i] = poly[i] + vol[i];
      gap = std::max(gap, std::abs(next[i] - prev[i]) / (1.0 + std::abs(next[i])));
    }
    check_against(next, &prev);
    run.iterates.push_back(std::move(next));
    run.sup_gap = gap;
    if (gap <= opts.tol) {
      run.converged = true;
      break;
    }
  }
  return run;
}

PicardTower build_tower(const TowerProblem& tp, double T, const PicardOptions& opts) {
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidParameter("T must be positive and finite");
  if (!(opts.tol > 0.0) || opts.max_iter < 1 || opts.initial_intervals < 4) {
    throw InvalidParameter("invalid Picard options");
  }
  const double grid_target = (opts.grid_tol > 0.0 ? opts.grid_tol : opts.tol) / 4.0;
  std::size_t intervals = opts.initial_intervals;
  GridRun current = run_on_grid(tp, T, intervals, opts);
  double disc_gap = std::numeric_limits<double>::infinity();
  while (intervals < opts.max_intervals) {
    GridRun finer = run_on_grid(tp, T, intervals * 2, opts);
    const auto& coarse_v = current.iterates.back();
    const auto& fine_v = finer.iterates.back();
    // Coarse nodes are exactly a subset of the fine ones.
    disc_gap = 0.0;
    std::size_t f = 0;
    for (std::size_t i = 0; i < coarse_v.size(); ++i) {
      while (finer.grid[f] < current.grid[i]) ++f;
      disc_gap = std::max(disc_gap, std::abs(fine_v[f] - coarse_v[i]) / (1.0 + std::abs(fine_v[f])));
    }
    current = std::move(finer);
    intervals *= 2;
    if (disc_gap < grid_target) break;
  }

  PicardTower tower;
  tower.grid = std::move(current.grid);
  tower.iterates = std::move(current.iterates);
  tower.majorant = std::move(current.majorant);
  tower.converged = current.converged;
  tower.iterations = static_cast<int>(tower.iterates.size()) - 1;
  tower.sup_gap = current.sup_gap;
  tower.discretization_gap = disc_gap;
  tower.worst_monotonicity =
      std::isfinite(current.worst_monotonicity) ? current.worst_monotonicity : 0.0;
  tower.worst_majorant_excess = current.worst_majorant_excess;

  // Derivatives of the final iterate: v^(i) = sum_l b_{i+l} t^l/l! + V_{n-i}[q h(v)].
  const auto& v = tower.iterates.back();
  const std::size_t nodes = tower.grid.size();
  std::vector<double> phi, phi_left;
  integrand(tp, coefficients(tp, tower.grid), v, tower.grid, phi, phi_left);
  const auto integrals = repeated_integrals(phi, tp.n, tower.grid, {}, phi_left);
  std::vector<double> values(nodes * static_cast<std::size_t>(tp.n));
  for (std::size_t i = 0; i < nodes; ++i) {
    for (int d = 0; d < tp.n; ++d) {
      const double p = taylor_polynomial(tp.data.subspan(static_cast<std::size_t>(d)), tower.grid[i]);
      values[i * static_cast<std::size_t>(tp.n) + static_cast<std::size_t>(d)] =
          p + integrals[static_cast<std::size_t>(tp.n - d - 1)][i];
    }
  }
  tower.solution = Trajectory(tower.grid, std::move(values), std::move(phi), tp.n, opts.tol);
  return tower;
}

}  // namespace

PicardTower picard_solve(const ScalarFn& h, int n, std::span<const double> b, double T,
                         const PicardOptions& opts) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  if (b.size() != static_cast<std::size_t>(n)) {
    throw InvalidParameter("b must have n values");
  }
  for (double bi : b) {
    if (!(bi > 0.0) || !std::isfinite(bi)) throw InvalidParameter("all b_i must be > 0");
  }
  const double u0 = taylor_polynomial(b, T);
  TowerProblem tp{nullptr, h, n, b, build_g_from_h(h, n), u0};
  return build_tower(tp, T, opts);
}

PicardTower picard_solve_reduced(const ScalarFn& q, const ScalarFn& h, int n,
                                 std::span<const double> data,
                                 std::span<const double> majorant_b, double T,
                                 const PicardOptions& opts) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  if (data.size() != static_cast<std::size_t>(n) ||
      majorant_b.size() != static_cast<std::size_t>(n)) {
    throw InvalidParameter("initial data and majorant data must have n values");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!(data[i] >= 0.0)) throw InvalidParameter("initial data must be >= 0");
    if (!(majorant_b[i] > data[i])) {
      throw InvalidParameter("majorant data must strictly exceed the initial data");
    }
  }
  const double q_sup = sup_on(q, 0.0, T);
  const ScalarFn h_eff = q_sup > 0.0 ? h.scaled_value(q_sup) : h;
  const double u0 = taylor_polynomial(majorant_b, T);
  TowerProblem tp{&q, h, n, data, build_g_from_h(h_eff, n), u0};
  return build_tower(tp, T, opts);
}

// ---------------------------------------------------------------------------
// Operator A

Trajectory apply_operator(const ProblemSpec& p, const Trajectory& u) {
  if (u.order() < p.m) throw InvalidParameter("u must supply m state components");
  const std::size_t nodes = u.size();
  const auto& grid = u.grid();
  std::vector<double> f(nodes);
  std::vector<double> state(static_cast<std::size_t>(p.m));
  for (std::size_t i = 0; i < nodes; ++i) {
    for (int c = 0; c < p.m; ++c) state[static_cast<std::size_t>(c)] = u.value(i, c);
    f[i] = p.rhs(grid[i], state);
    if (!std::isfinite(f[i])) {
      throw NumericFailure(grid[i], "right-hand side is not finite at t=" + format_double(grid[i]));
    }
  }
  std::vector<double> values(nodes * static_cast<std::size_t>(p.m));
  if (nodes == 1) {
    for (int d = 0; d < p.m; ++d) values[static_cast<std::size_t>(d)] = p.a[static_cast<std::size_t>(d)];
    return Trajectory(grid, std::move(values), std::move(f), p.m);
  }
  // Left limits where a jump of q falls on a node.
  std::vector<double> f_left;
  const auto& breaks = p.q.breakpoints();
  for (std::size_t i = 1; i < nodes && !breaks.empty(); ++i) {
    if (!std::binary_search(breaks.begin(), breaks.end(), grid[i])) continue;
    if (f_left.empty()) f_left = f;
    for (int c = 0; c < p.m; ++c) state[static_cast<std::size_t>(c)] = u.value(i, c);
    f_left[i] = p.rhs(std::nextafter(grid[i], 0.0), state);
  }
  const auto integrals = repeated_integrals(f, p.m, grid, {}, f_left);
  const std::span<const double> a(p.a);
  for (std::size_t i = 0; i < nodes; ++i) {
    for (int d = 0; d < p.m; ++d) {
      values[i * static_cast<std::size_t>(p.m) + static_cast<std::size_t>(d)] =
          taylor_polynomial(a.subspan(static_cast<std::size_t>(d)), grid[i]) +
          integrals[static_cast<std::size_t>(p.m - d - 1)][i];
    }
  }
  return Trajectory(grid, std::move(values), std::move(f), p.m);
}

double operator_bound_violation(const ProblemSpec& p, const Trajectory& v, const Trajectory& u) {
  if (v.grid() != u.grid()) throw InvalidParameter("u and v must share a grid");
  const Trajectory au = apply_operator(p, u);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < au.size(); ++i) {
    for (int d = 0; d < p.m; ++d) {
      const double x = au.value(i, d);
      worst = std::max({worst, x - v.value(i, d), -x});
    }
  }
  return worst;
}

namespace {

using Rng = std::mt19937_64;

double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Smooth random factor in [0, 1]: random levels at random knots joined by a
// quintic smoothstep.
std::vector<double> random_factor(Rng& rng, std::span<const double> grid) {
  const double t0 = grid.front();
  const double t1 = grid.back();
  const int knots = 1 + static_cast<int>(rng() % 6);
  std::vector<double> at(static_cast<std::size_t>(knots));
  std::vector<double> level(static_cast<std::size_t>(knots));
  for (auto& x : at) x = t0 + (t1 - t0) * unit(rng);
  std::sort(at.begin(), at.end());
  for (auto& l : level) l = unit(rng);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    auto it = std::upper_bound(at.begin(), at.end(), t);
    if (it == at.begin()) {
      out[i] = level.front();
    } else if (it == at.end()) {
      out[i] = level.back();
    } else {
      const auto j = static_cast<std::size_t>(it - at.begin());
      const double x = (t - at[j - 1]) / (at[j] - at[j - 1]);
      const double s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
      out[i] = level[j - 1] + (level[j] - level[j - 1]) * s;
    }
  }
  return out;
}

}  // namespace

BoundPreservationReport verify_bound_preservation(const ProblemSpec& p, const Trajectory& v,
                                                  int trials, std::uint64_t seed,
                                                  std::size_t grid_points) {
  p.validate();
  BoundPreservationReport report;
  report.trials = trials;
  if (trials <= 0) return report;
  if (v.order() < p.m) throw InvalidParameter("v must carry m state components");
  if (grid_points < 2) throw InvalidParameter("grid_points must be >= 2");

  std::vector<double> grid(grid_points);
  const double T = v.t_end();
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid[i] = T * static_cast<double>(i) / static_cast<double>(grid_points - 1);
  }
  const std::size_t m = static_cast<std::size_t>(p.m);
  std::vector<double> v_values(grid_points * m);
  std::vector<double> v_top(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    for (std::size_t c = 0; c < m; ++c) v_values[i * m + c] = v.eval(grid[i], static_cast<int>(c));
    v_top[i] = v.eval(grid[i], p.m);
  }
  const Trajectory v_grid(grid, v_values, v_top, p.m);

  Rng rng(seed);
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> u_values(grid_points * m);
    for (std::size_t c = 0; c < m; ++c) {
      const auto r = random_factor(rng, grid);
      for (std::size_t i = 0; i < grid_points; ++i) {
        u_values[i * m + c] = r[i] * v_values[i * m + c];
      }
    }
    const auto c_factor = random_factor(rng, grid);
    ProblemSpec pt = p.majorant_problem();
    const auto c_shared = std::make_shared<const std::vector<double>>(c_factor);
    const auto grid_shared = std::make_shared<const std::vector<double>>(grid);
    pt.f_override = [base = p.majorant_problem(), c_shared, grid_shared](
                        double t, std::span<const double> x) {
      // c(t) is only ever requested at grid nodes.
      const auto& g = *grid_shared;
      const auto idx = static_cast<std::size_t>(
          std::lower_bound(g.begin(), g.end(), t) - g.begin());
      const double c = (*c_shared)[std::min(idx, g.size() - 1)];
      return c * base.majorant_rhs(t, x);
    };
    const Trajectory u(grid, std::move(u_values), std::vector<double>(grid_points, 0.0), p.m);
    const double violation = operator_bound_violation(pt, v_grid, u);
    if (violation > report.worst_violation) {
      report.worst_violation = violation;
      report.worst_trial = trial;
    }
  }
  report.passed = report.worst_violation <= 1e-9;
  return report;
}

}  // namespace blowup
