#include "blowup/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "blowup/error.hpp"
#include "blowup/format.hpp"
#include "blowup/quadrature.hpp"
#include "blowup/volterra.hpp"

namespace blowup {

ProblemSpec ReducedProblem::as_problem() const {
  ProblemSpec p;
  p.m = n;
  p.k = 0;
  p.a = a_reduced;
  p.q = q;
  p.h = h;
  return p;
}

ReducedProblem reduce_problem(const ProblemSpec& p) {
  p.validate();
  ReducedProblem r;
  r.n = p.m - p.k;
  r.a_reduced.assign(p.a.begin() + p.k, p.a.end());
  r.q = p.q;
  r.h = p.h;
  return r;
}

Trajectory lift_solution(const Trajectory& u, std::span<const double> a_low, int k) {
  if (k < 0) throw InvalidParameter("k must be >= 0");
  if (a_low.size() != static_cast<std::size_t>(k)) {
    throw InvalidParameter("lift needs exactly k low-order initial values");
  }
  if (k == 0) return u;

  const int n = u.order();
  const int m = n + k;
  const auto& grid = u.grid();
  const std::size_t nodes = grid.size();
  const auto u0 = u.component(0);
  const auto du = u.component(n == 1 ? n : 1);

  std::vector<std::vector<double>> integrals;
  if (nodes > 1) integrals = repeated_integrals(u0, k, grid, du);

  std::vector<double> values(nodes * static_cast<std::size_t>(m));
  std::vector<double> top(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    double* row = values.data() + i * static_cast<std::size_t>(m);
    for (int d = 0; d < k; ++d) {
      const double integral =
          nodes > 1 ? integrals[static_cast<std::size_t>(k - d - 1)][i] : 0.0;
      row[d] = taylor_polynomial(a_low.subspan(static_cast<std::size_t>(d)), grid[i]) + integral;
    }
    for (int d = 0; d < n; ++d) row[k + d] = u.value(i, d);
    top[i] = u.top(i);
  }
  return Trajectory(grid, std::move(values), std::move(top), m, u.tolerance());
}

// ---------------------------------------------------------------------------
// Majorization

namespace {

const Trajectory& trajectory_of(const IntegrationResult& r) {
  if (const auto* ev = std::get_if<BlowupEvent>(&r)) return ev->partial;
  return std::get<Trajectory>(r);
}

}  // namespace

MajorizationTable majorization_experiment(const ScalarFn& q, const ScalarFn& h, int n,
                                          std::span<const double> a_reduced,
                                          std::span<const double> b,
                                          const MajorizationOptions& opts) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  if (a_reduced.size() != static_cast<std::size_t>(n) || b.size() != static_cast<std::size_t>(n)) {
    throw InvalidParameter("initial data and b must have n values");
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!(b[i] > a_reduced[i])) throw InvalidParameter("b_i must exceed the initial data");
  }
  if (opts.levels < 0) throw InvalidParameter("number of levels must be >= 0");
  if (!(opts.rho > 1.0)) throw InvalidParameter("rho must be > 1");
  if (!(opts.horizon > 0.0)) throw InvalidParameter("horizon must be > 0");

  ProblemSpec up;
  up.m = n;
  up.k = 0;
  up.a.assign(a_reduced.begin(), a_reduced.end());
  up.q = q;
  up.h = h;
  up.validate();

  MajorizationTable table;
  table.rho = opts.rho;
  table.levels_requested = opts.levels;

  IntegrateOptions io;
  io.escape_threshold = std::numeric_limits<double>::max();

  // Base level: a_0 itself, or the first time u is meaningfully positive.
  double t0 = 0.0;
  double u_t0 = a_reduced[0];
  if (!(u_t0 > 0.0)) {
    const double norm = *std::max_element(a_reduced.begin(), a_reduced.end());
    const double level = 1e-8 * (1.0 + norm);
    io.stop_when = [level](double, std::span<const double> y) { return y[0] >= level; };
    const auto probe = integrate(up, opts.horizon, opts.tol, io);
    const auto tc = first_crossing(trajectory_of(probe), 0, level);
    if (!tc) {
      table.level_unreachable = opts.levels > 0;
      table.passed = true;
      return table;
    }
    t0 = *tc;
    u_t0 = level;
  }
  table.t0 = t0;
  table.u_t0 = u_t0;

  const double top_level = u_t0 * std::pow(opts.rho, opts.levels);
  io.stop_when = [top_level](double, std::span<const double> y) { return y[0] >= top_level; };
  const auto u_result = integrate(up, opts.horizon, opts.tol, io);
  const Trajectory& u = trajectory_of(u_result);

  std::vector<double> t_levels{t0};
  std::vector<double> taus{0.0};
  std::vector<double> eps{0.0};
  const auto& q_breaks = q.breakpoints();
  const auto q_fn = [&q](double t) { return q(t); };
  const quad::QuadOptions qo{1e-14, 1e-13, 4000};
  for (int j = 1; j <= opts.levels; ++j) {
    const auto tc = first_crossing(u, 0, u_t0 * std::pow(opts.rho, j));
    if (!tc) break;
    const double t_prev = t_levels.back();
    std::vector<double> inner;
    for (double bp : q_breaks) {
      if (bp > t_prev && bp < *tc) inner.push_back(bp);
    }
    const double e = *tc > t_prev ? quad::gauss_kronrod_split(q_fn, t_prev, *tc, inner, qo).value : 0.0;
    t_levels.push_back(*tc);
    eps.push_back(e);
    taus.push_back(taus.back() + (*tc - t_prev) + e);
  }
  table.levels_reached = static_cast<int>(t_levels.size()) - 1;
  table.level_unreachable = table.levels_reached < opts.levels;

  // Majorant w^(n) = h(rho w) on the reparameterized clock.
  std::optional<IntegrationResult> w_result;
  if (taus.back() > 0.0) {
    ProblemSpec wp;
    wp.m = n;
    wp.k = 0;
    wp.a.assign(b.begin(), b.end());
    wp.q = make_constant(1.0);
    wp.h = h.scaled_argument(opts.rho);
    IntegrateOptions wo;
    wo.escape_threshold = std::numeric_limits<double>::max();
    wo.stop_times.assign(taus.begin() + 1, taus.end() - 1);
    w_result = integrate(wp, taus.back(), opts.tol, wo);
  }

  table.passed = true;
  for (std::size_t j = 0; j < t_levels.size(); ++j) {
    MajorizationRow row;
    row.j = static_cast<int>(j);
    row.t_j = t_levels[j];
    row.tau_j = taus[j];
    row.eps_j = eps[j];
    row.u_derivs = u.eval_state(t_levels[j]);
    if (j == 0) {
      row.w_derivs.assign(b.begin(), b.end());
    } else {
      const Trajectory& w = trajectory_of(*w_result);
      if (taus[j] <= w.t_end()) {
        row.w_derivs = w.eval_state(taus[j]);
      } else {
        // w escaped before tau_j: it dominates any finite u.
        row.w_derivs.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
      }
    }
    row.min_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const double margin = row.w_derivs[ii] - row.u_derivs[ii];
      row.min_margin = std::min(row.min_margin, margin);
      if (margin < -1e-7 * (1.0 + std::abs(row.u_derivs[ii]))) table.passed = false;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Pipeline

std::string_view to_string(PipelineVerdict v) {
  switch (v) {
    case PipelineVerdict::GlobalConstructed: return "GlobalConstructed";
    case PipelineVerdict::BlowUpDetected: return "BlowUpDetected";
    case PipelineVerdict::NoBlowUpObserved: return "NoBlowUpObserved";
    case PipelineVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

bool PipelineReport::checks_passed() const {
  if (verdict == PipelineVerdict::GlobalConstructed) {
    if (!consistent || !picard_converged) return false;
  }
  if (sandwich_violation && *sandwich_violation > 1e-6) return false;
  if (majorization && !majorization->passed) return false;
  return true;
}

namespace {

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(stage, e.what());
  }
}

void construct_global(const ProblemSpec& p, double horizon, const PipelineOptions& opts,
                      PipelineReport& report) {
  const auto& r = report.reduced;
  std::vector<double> b(r.a_reduced);
  for (double& bi : b) bi += 1.0;

  PicardOptions po = opts.picard;
  po.tol = opts.solver_tol;
  po.grid_tol = opts.tol;
  const PicardTower tower = staged("construct", [&] {
    return picard_solve_reduced(r.q, r.h, r.n, r.a_reduced, b, horizon, po);
  });
  report.picard_iterations = tower.iterations;
  report.picard_converged = tower.converged;
  report.picard_grid = tower.grid.size();

  const std::span<const double> a_low(p.a.data(), static_cast<std::size_t>(p.k));
  Trajectory lifted = staged("lift", [&] { return lift_solution(tower.solution, a_low, p.k); });

  const ProblemSpec majorant = p.majorant_problem();
  const auto direct = staged("integrate", [&] { return integrate(majorant, horizon, opts.solver_tol); });
  if (const auto* traj = std::get_if<Trajectory>(&direct)) {
    double gap_abs = 0.0;
    double gap_scaled = 0.0;
    for (std::size_t i = 0; i < lifted.size(); ++i) {
      const double t = lifted.time(i);
      for (int c = 0; c < p.m; ++c) {
        const double ref = traj->eval(t, c);
        const double d = std::abs(lifted.value(i, c) - ref);
        gap_abs = std::max(gap_abs, d);
        gap_scaled = std::max(gap_scaled, d / (1.0 + std::abs(ref)));
      }
    }
    report.consistency_abs = gap_abs;
    report.consistency_scaled = gap_scaled;
    report.consistent = gap_scaled <= 100.0 * opts.tol;
    report.direct = *traj;
  } else {
    report.notes.push_back("integrate: direct integration escaped before the horizon");
  }

  if (p.f_override) {
    const auto actual = staged("integrate", [&] { return integrate(p, horizon, opts.solver_tol); });
    const Trajectory& w = trajectory_of(actual);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lifted.size(); ++i) {
      const double t = lifted.time(i);
      if (t > w.t_end()) break;
      for (int c = 0; c < p.m; ++c) {
        const double wc = w.eval(t, c);
        const double scale = 1.0 + std::abs(lifted.value(i, c));
        worst = std::max({worst, -wc / scale, (wc - lifted.value(i, c)) / scale});
      }
    }
    report.sandwich_violation = worst;
  }

  MajorizationOptions mo = opts.majorization;
  mo.horizon = horizon;
  report.majorization = staged("majorize", [&] {
    return majorization_experiment(r.q, r.h, r.n, r.a_reduced, b, mo);
  });
  report.constructed = std::move(lifted);
}

}  // namespace

PipelineReport run_pipeline(const ProblemSpec& p, double horizon, const PipelineOptions& opts) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidParameter("horizon must be positive and finite");
  }
  PipelineReport report;
  report.horizon = horizon;
  report.reduced = staged("reduce", [&] { return reduce_problem(p); });
  report.classification =
      staged("classify", [&] { return classify(report.reduced.h, report.reduced.n); });
  report.small_data = *std::max_element(p.a.begin(), p.a.end()) < 1.0;

  DetectOptions dopts = opts.detect;
  dopts.horizon = horizon;
  dopts.tol = opts.solver_tol;

  switch (report.classification.verdict) {
    case Verdict::Diverges:
      report.regime = "global existence for all nonnegative data";
      construct_global(p, horizon, opts, report);
      report.verdict = PipelineVerdict::GlobalConstructed;
      break;
    case Verdict::Converges:
      report.regime = "regime: blow-up for large data";
      report.blowup = staged("detect", [&] { return detect_blowup(p, dopts); });
      report.verdict = report.blowup->kind == BlowupKind::BlowUp ? PipelineVerdict::BlowUpDetected
                                                                : PipelineVerdict::NoBlowUpObserved;
      break;
    case Verdict::Inconclusive:
      report.regime = "undecided";
      try {
        report.blowup = staged("detect", [&] { return detect_blowup(p, dopts); });
      } catch (const StageFailure& e) {
        report.notes.emplace_back(e.what());
      }
      try {
        construct_global(p, horizon, opts, report);
      } catch (const StageFailure& e) {
        report.notes.emplace_back(e.what());
      }
      report.verdict = PipelineVerdict::Inconclusive;
      break;
  }
  return report;
}

}  // namespace blowup
