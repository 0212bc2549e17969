#include "blowup/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "blowup/blowup_detection.hpp"
#include "blowup/classifier.hpp"
#include "blowup/error.hpp"
#include "blowup/format.hpp"
#include "blowup/picard.hpp"
#include "blowup/theorem.hpp"

namespace blowup {

namespace fs = std::filesystem;

std::string ExperimentOutcome::field(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  return "";
}

std::string ExperimentOutcome::report_text() const {
  std::string s;
  for (const auto& [k, v] : fields) s += k + "=" + v + "\n";
  s += "\n";
  for (const auto& line : summary) s += "# " + line + "\n";
  return s;
}

namespace {

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) : out_(path, std::ios::binary) {
    if (!out_) throw InvalidParameter("cannot write `" + path + "`");
    out_ << header << '\n';
  }
  CsvWriter& operator<<(double x) {
    sep();
    out_ << format_double(x);
    return *this;
  }
  CsvWriter& operator<<(int x) {
    sep();
    out_ << x;
    return *this;
  }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }
  std::ofstream out_;
  bool first_ = true;
};

struct Runner {
  const ExperimentConfig& cfg;
  ExperimentOutcome& out;

  void put(const std::string& key, std::string value) { out.fields.emplace_back(key, std::move(value)); }
  void put(const std::string& key, double value) { put(key, format_double(value)); }
  void put(const std::string& key, int value) { put(key, std::to_string(value)); }
  void put(const std::string& key, bool value) { put(key, std::string(value ? "true" : "false")); }
  void put(const std::string& key, const char* value) { put(key, std::string(value)); }
  void put(const std::string& key, std::string_view value) { put(key, std::string(value)); }
  void say(std::string line) { out.summary.push_back(std::move(line)); }

  std::string path(const std::string& name) {
    const std::string p = (fs::path(cfg.out) / name).string();
    out.files.push_back(p);
    return p;
  }
  std::string trajectory_path() {
    if (cfg.csv) {
      out.files.push_back(*cfg.csv);
      return *cfg.csv;
    }
    return path("trajectory.csv");
  }
  void fail_verdict() { out.exit_code = kExitVerdictFailure; }

  void classify_run() {
    const int n = cfg.reduced_order();
    const IntegralVerdict v = cfg.alpha == 1.0 ? classify(cfg.h, n) : classify_scaled(cfg.h, n, cfg.alpha);
    put("h", cfg.h.repr());
    put("n", n);
    put("alpha", cfg.alpha);
    put("verdict", to_string(v.verdict));
    put("estimate", v.estimate ? format_double(*v.estimate) : std::string("none"));
    put("panels_used", v.panels_used);
    put("method", to_string(v.method));
    put("cumulative", v.evidence.cumulative);
    put("last_panel", v.evidence.last_panel);
    put("cap_hit", v.evidence.cap_hit);
    say(std::string("growth integral for ") + cfg.h.repr() + " with n=" + std::to_string(n) + ": " +
        std::string(to_string(v.verdict)) +
        (v.verdict == Verdict::Converges ? " (blow-up regime)"
                                         : v.verdict == Verdict::Diverges ? " (global existence)" : ""));
  }

  void integrate_run() {
    const ProblemSpec p = cfg.problem();
    const auto res = integrate(p, cfg.T, cfg.tol);
    const Trajectory* traj = nullptr;
    if (const auto* ev = std::get_if<BlowupEvent>(&res)) {
      traj = &ev->partial;
      put("outcome", "BlowupEvent");
      put("reason", ev->reason == BlowupReason::Escape ? "escape" : "step-collapse");
      put("t_escape", ev->t_escape);
      say("solution left the resolvable range at t=" + format_double(ev->t_escape));
    } else {
      traj = &std::get<Trajectory>(res);
      put("outcome", "Trajectory");
      say("integrated to T=" + format_double(cfg.T));
    }
    put("T", cfg.T);
    put("tol", cfg.tol);
    put("steps", static_cast<int>(traj->size()) - 1);
    put("t_end", traj->t_end());
    for (int c = 0; c < p.m; ++c) put("w" + std::to_string(c) + "_end", traj->value(traj->size() - 1, c));
    write_trajectory_csv(*traj, trajectory_path());
  }

  void write_escapes(const BlowupReport& r) {
    CsvWriter csv(path("escapes.csv"), "threshold,t_escape");
    for (const auto& e : r.escape_thresholds) {
      csv << e.threshold << e.time;
      csv.end_row();
    }
  }

  void put_blowup(const BlowupReport& r) {
    put("kind", r.kind == BlowupKind::BlowUp ? "BlowUp" : "GlobalUpToHorizon");
    put("horizon", r.horizon);
    put("t_stop", r.t_stop);
    put("step_collapse", r.step_collapse);
    put("escapes", static_cast<int>(r.escape_thresholds.size()));
    if (r.t_blow_estimate) put("t_blow_estimate", *r.t_blow_estimate);
    if (r.t_blow_interval) {
      put("t_blow_lo", r.t_blow_interval->first);
      put("t_blow_hi", r.t_blow_interval->second);
    }
  }

  void detect_run() {
    DetectOptions o;
    o.thresholds = cfg.thresholds;
    o.horizon = cfg.horizon;
    o.tol = cfg.tol;
    const auto r = detect_blowup(cfg.problem(), o);
    put_blowup(r);
    write_escapes(r);
    if (r.kind == BlowupKind::BlowUp) {
      say("blow-up near t=" + format_double(*r.t_blow_estimate));
    } else {
      say("no blow-up before the horizon " + format_double(cfg.horizon));
    }
  }

  void construct_run() {
    const ProblemSpec p = cfg.problem();
    const ReducedProblem r = reduce_problem(p);
    PicardOptions po;
    po.tol = cfg.tol;
    po.max_iter = cfg.max_iter;
    const PicardTower tower =
        picard_solve_reduced(r.q, r.h, r.n, r.a_reduced, cfg.majorant_data(), cfg.T, po);
    const std::span<const double> a_low(p.a.data(), static_cast<std::size_t>(p.k));
    const Trajectory v = lift_solution(tower.solution, a_low, p.k);

    put("n", r.n);
    put("T", cfg.T);
    put("converged", tower.converged);
    put("iterations", tower.iterations);
    put("sup_gap", tower.sup_gap);
    put("discretization_gap", tower.discretization_gap);
    put("grid_points", static_cast<int>(tower.grid.size()));
    put("monotone", tower.monotone());
    put("bounded", tower.bounded());
    put("worst_monotonicity", tower.worst_monotonicity);
    put("worst_majorant_excess", tower.worst_majorant_excess);
    for (int c = 0; c < p.m; ++c) put("w" + std::to_string(c) + "_T", v.value(v.size() - 1, c));

    {
      CsvWriter csv(path("iterates.csv"), "j,t,v_j");
      for (std::size_t j = 0; j < tower.iterates.size(); ++j) {
        for (std::size_t i = 0; i < tower.grid.size(); ++i) {
          csv << static_cast<int>(j) << tower.grid[i] << tower.iterates[j][i];
          csv.end_row();
        }
      }
    }
    write_trajectory_csv(v, trajectory_path());

    const auto bp = verify_bound_preservation(p, v, cfg.trials, cfg.seed);
    put("bound_trials", bp.trials);
    put("bound_seed", std::to_string(cfg.seed));
    put("bound_worst_violation", bp.trials > 0 ? format_double(bp.worst_violation) : std::string("none"));
    put("bound_passed", bp.passed);

    const bool ok = tower.converged && tower.monotone() && tower.bounded() && bp.passed;
    if (!ok) fail_verdict();
    say(std::string("Picard construction ") + (tower.converged ? "converged" : "did not converge") +
        " after " + std::to_string(tower.iterations) + " iterations; tower " +
        (tower.monotone() ? "monotone" : "NOT monotone") + ", " +
        (tower.bounded() ? "below the majorant" : "ABOVE the majorant"));
  }

  void write_majorization(const MajorizationTable& t) {
    CsvWriter csv(path("majorization.csv"), "j,t_j,tau_j,eps_j,margin_min");
    for (const auto& row : t.rows) {
      csv << row.j << row.t_j << row.tau_j << row.eps_j << row.min_margin;
      csv.end_row();
    }
  }

  void put_majorization(const MajorizationTable& t, const std::string& prefix) {
    put(prefix + "levels_requested", t.levels_requested);
    put(prefix + "levels_reached", t.levels_reached);
    put(prefix + "level_unreachable", t.level_unreachable);
    put(prefix + "t0", t.t0);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& row : t.rows) worst = std::min(worst, row.min_margin);
    put(prefix + "margin_min", worst);
    put(prefix + "passed", t.passed);
  }

  void majorize_run() {
    const int n = cfg.reduced_order();
    if (cfg.a.size() < static_cast<std::size_t>(n)) throw InvalidParameter("a has fewer than n values");
    const std::vector<double> a_red(cfg.a.end() - n, cfg.a.end());
    std::vector<double> b = cfg.b ? *cfg.b : a_red;
    if (!cfg.b) {
      for (double& bi : b) bi += 1.0;
    }
    MajorizationOptions mo;
    mo.levels = cfg.J;
    mo.horizon = cfg.horizon;
    mo.rho = cfg.rho;
    mo.tol = cfg.tol;
    const auto t = majorization_experiment(cfg.q, cfg.h, n, a_red, b, mo);
    put("n", n);
    put("rho", cfg.rho);
    put_majorization(t, "");
    write_majorization(t);
    if (!t.passed) fail_verdict();
    say(std::string("majorization over ") + std::to_string(t.levels_reached) + " levels " +
        (t.passed ? "holds" : "FAILS"));
  }

  void comparison_run() {
    const int n = cfg.reduced_order();
    const ScalarFn g = cfg.g ? *cfg.g : build_g_from_h(cfg.h, n);
    const auto r = verify_comparison_inequality(g, n, cfg.u0, cfg.T, static_cast<std::size_t>(cfg.grid));
    const auto c = comparison_constants(n);
    put("g", g.repr());
    put("n", n);
    put("alpha", c.alpha);
    put("beta", c.beta);
    put("u0", cfg.u0);
    put("T", cfg.T);
    put("grid", cfg.grid);
    put("min_slack", r.min_slack);
    put("min_relative_slack", r.min_relative_slack);
    put("passed", r.passed);
    CsvWriter csv(path("comparison.csv"), "t,lhs,rhs,slack");
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
      csv << r.grid[i] << r.lhs[i] << r.rhs[i] << (r.lhs[i] - r.rhs[i]);
      csv.end_row();
    }
    if (!r.passed) fail_verdict();
    say(std::string("comparison inequality ") + (r.passed ? "holds" : "FAILS") + " on " +
        std::to_string(cfg.grid) + " points");
  }

  void pipeline_run() {
    PipelineOptions po;
    po.solver_tol = cfg.tol;
    po.picard.max_iter = cfg.max_iter;
    po.detect.thresholds = cfg.thresholds;
    po.majorization.levels = cfg.J;
    po.majorization.rho = cfg.rho;
    const ProblemSpec p = cfg.problem();
    const PipelineReport r = run_pipeline(p, cfg.horizon, po);

    put("verdict", to_string(r.verdict));
    put("classification", to_string(r.classification.verdict));
    put("method", to_string(r.classification.method));
    put("n", r.reduced.n);
    put("regime", r.regime);
    put("small_data", r.small_data);
    put("horizon", r.horizon);
    if (r.constructed) {
      put("picard_converged", r.picard_converged);
      put("picard_iterations", r.picard_iterations);
      put("picard_grid", static_cast<int>(r.picard_grid));
      if (r.consistency_abs) {
        put("consistency_abs", *r.consistency_abs);
        put("consistency_scaled", *r.consistency_scaled);
      }
      put("consistent", r.consistent);
      if (r.sandwich_violation) put("sandwich_violation", *r.sandwich_violation);
      write_trajectory_csv(*r.constructed, trajectory_path());
      if (r.direct) write_trajectory_csv(*r.direct, path("direct.csv"));
    }
    if (r.majorization) {
      put_majorization(*r.majorization, "majorization_");
      write_majorization(*r.majorization);
    }
    if (r.blowup) {
      put_blowup(*r.blowup);
      write_escapes(*r.blowup);
    }
    for (std::size_t i = 0; i < r.notes.size(); ++i) put("note" + std::to_string(i), r.notes[i]);
    put("checks_passed", r.checks_passed());
    if (!r.checks_passed()) fail_verdict();

    switch (r.verdict) {
      case PipelineVerdict::GlobalConstructed:
        say("global solution constructed on [0, " + format_double(r.horizon) + "]" +
            (r.consistent ? " and confirmed by direct integration" : "; direct integration DISAGREES"));
        break;
      case PipelineVerdict::BlowUpDetected:
        say("blow-up detected near t=" + format_double(*r.blowup->t_blow_estimate) +
            (r.small_data ? " (small data; the blow-up statement covers large data)" : ""));
        break;
      case PipelineVerdict::NoBlowUpObserved:
        say("blow-up regime, but no blow-up before the horizon" +
            std::string(r.small_data ? " (small data)" : ""));
        break;
      case PipelineVerdict::Inconclusive:
        say("classification inconclusive; probes reported without a verdict");
        break;
    }
  }
};

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::string header = "t";
  for (int c = 0; c < traj.order(); ++c) header += ",w" + std::to_string(c);
  CsvWriter csv(path, header);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    csv << traj.time(i);
    for (int c = 0; c < traj.order(); ++c) csv << traj.value(i, c);
    csv.end_row();
  }
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  Runner run{cfg, out};
  run.put("run", to_string(cfg.run));
  try {
    if (const auto errs = validate_config(cfg); !errs.empty()) {
      throw InvalidParameter(errs.front().to_string());
    }
    fs::create_directories(cfg.out);
    if (cfg.csv) {
      const auto parent = fs::path(*cfg.csv).parent_path();
      if (!parent.empty()) fs::create_directories(parent);
    }
    switch (cfg.run) {
      case RunKind::Classify: run.classify_run(); break;
      case RunKind::Integrate: run.integrate_run(); break;
      case RunKind::DetectBlowup: run.detect_run(); break;
      case RunKind::Construct: run.construct_run(); break;
      case RunKind::Majorize: run.majorize_run(); break;
      case RunKind::Pipeline: run.pipeline_run(); break;
      case RunKind::VerifyComparison: run.comparison_run(); break;
    }
    run.put("status", out.exit_code == kExitPass ? "pass" : "fail");
  } catch (const std::exception& e) {
    out.exit_code = kExitError;
    run.put("status", "error");
    run.put("error", std::string(e.what()));
    run.say(std::string("error: ") + e.what());
  }

  try {
    fs::create_directories(cfg.out);
    const std::string report_path = (fs::path(cfg.out) / "report.txt").string();
    std::ofstream rep(report_path, std::ios::binary);
    rep << out.report_text();
    out.files.insert(out.files.begin(), report_path);
  } catch (const std::exception&) {
    out.exit_code = kExitError;
  }
  return out;
}

}  // namespace blowup
