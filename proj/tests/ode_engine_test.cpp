#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "blowup/blowup_detection.hpp"
#include "blowup/error.hpp"
#include "blowup/ode_engine.hpp"
#include "oracles.hpp"

using namespace blowup;

namespace {

ProblemSpec problem(int m, int k, std::vector<double> a, ScalarFn h,
                    ScalarFn q = make_constant(1.0)) {
  ProblemSpec p;
  p.m = m;
  p.k = k;
  p.a = std::move(a);
  p.h = std::move(h);
  p.q = std::move(q);
  return p;
}

}  // namespace

TEST(ProblemSpec, Validation) {
  EXPECT_THROW(problem(2, 2, {1, 0}, make_power(1)).validate(), InvalidParameter);
  EXPECT_THROW(problem(2, 0, {1}, make_power(1)).validate(), InvalidParameter);
  EXPECT_THROW(problem(1, 0, {-1}, make_power(1)).validate(), InvalidParameter);
  auto p = problem(1, 0, {1}, make_power(1));
  p.f_override = [](double, std::span<const double> x) { return 2.0 * x[0]; };
  EXPECT_THROW(p.validate(), InvalidParameter);
  p.f_override = [](double, std::span<const double> x) { return 0.5 * x[0]; };
  EXPECT_NO_THROW(p.validate());
}

TEST(Integrate, CoshOracle) {
  const auto res = integrate(problem(2, 0, {1, 0}, make_power(1)), 10.0, 1e-9);
  const auto& traj = std::get<Trajectory>(res);
  EXPECT_EQ(traj.time(0), 0.0);
  EXPECT_EQ(traj.t_end(), 10.0);
  EXPECT_NEAR(traj.eval(1.0, 0), std::cosh(1.0), 1e-9 * std::cosh(1.0));
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 0.01 * i;
    worst = std::max(worst, std::abs(traj.eval(t, 0) - std::cosh(t)));
    EXPECT_NEAR(traj.eval(t, 1), std::sinh(t), 1e-6);
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Integrate, RiccatiEscape) {
  const double tol = 1e-8;
  const auto res = integrate(problem(1, 0, {1}, make_power(2)), 2.0, tol);
  ASSERT_TRUE(std::holds_alternative<BlowupEvent>(res));
  const auto& ev = std::get<BlowupEvent>(res);
  EXPECT_LT(ev.t_escape, 1.0 + tol);
  EXPECT_GT(ev.t_escape, 1.0 - 1e-6);
}

TEST(Integrate, ZeroData) {
  const auto res = integrate(problem(1, 0, {0}, make_power(1)), 5.0, 1e-8);
  const auto& traj = std::get<Trajectory>(res);
  EXPECT_EQ(traj.t_end(), 5.0);
  for (std::size_t i = 0; i < traj.size(); ++i) EXPECT_EQ(traj.value(i, 0), 0.0);
  EXPECT_EQ(traj.eval(2.5, 0), 0.0);
}

TEST(Integrate, TolRange) {
  const auto p = problem(1, 0, {1}, make_power(1));
  EXPECT_THROW(integrate(p, 1.0, 1e-15), InvalidParameter);
  EXPECT_THROW(integrate(p, 1.0, 0.1), InvalidParameter);
}

TEST(Integrate, NonFiniteRhsThrows) {
  FnMeta meta{true, true, std::nullopt, FamilyTag::Custom};
  const auto h = make_custom([](double s) { return s > 2.0 ? std::nan("") : s; }, meta);
  EXPECT_THROW(integrate(problem(1, 0, {1}, h), 5.0, 1e-8), NumericFailure);
}

TEST(Integrate, LandsOnBreakpointsAndStopTimes) {
  const auto q = make_piecewise({{0.0, 1.0, 1.0}, {1.0, std::numeric_limits<double>::infinity(), 0.0}});
  IntegrateOptions opts;
  opts.stop_times = {0.37, 2.5};
  const auto res = integrate(problem(1, 0, {1}, make_power(1), q), 3.0, 1e-10, opts);
  const auto& traj = std::get<Trajectory>(res);
  const auto& g = traj.grid();
  for (double s : {0.37, 1.0, 2.5}) {
    EXPECT_NE(std::find(g.begin(), g.end(), s), g.end()) << s;
  }
  EXPECT_NEAR(traj.eval(3.0, 0), std::exp(1.0), 1e-9);
}

TEST(Integrate, MonotoneComponentsAndSelfConsistency) {
  const double tol = 1e-9;
  const auto p = problem(3, 1, {0.5, 0, 1}, make_power(1.5));
  const auto res = integrate(p, 1.0, tol);
  const auto& traj = std::get<Trajectory>(res);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_GE(traj.value(i, c) - traj.value(i - 1, c), -10 * tol);
    }
  }
  // w^(m-1)(t) - a_{m-1} against the running integral of f (trapezoid on a fine
  // resampling of the dense output).
  const int N = 20000;
  double integral = 0.0;
  double prev = traj.eval(0.0, 3);
  for (int i = 1; i <= N; ++i) {
    const double cur = traj.eval(double(i) / N, 3);
    integral += 0.5 * (prev + cur) / N;
    prev = cur;
  }
  EXPECT_NEAR(traj.eval(1.0, 2) - 1.0, integral, 10 * tol * (1.0 + integral));
}

TEST(Integrate, DenseOutputOutsideSpanThrows) {
  const auto res = integrate(problem(1, 0, {1}, make_power(1)), 1.0, 1e-8);
  const auto& traj = std::get<Trajectory>(res);
  EXPECT_THROW(traj.eval(1.5, 0), InvalidParameter);
}

TEST(FirstCrossing, LocatesLevel) {
  const auto res = integrate(problem(1, 0, {1}, make_power(1)), 3.0, 1e-11);
  const auto& traj = std::get<Trajectory>(res);
  const auto tc = first_crossing(traj, 0, 10.0);
  ASSERT_TRUE(tc);
  EXPECT_NEAR(*tc, std::log(10.0), 1e-9);
  EXPECT_FALSE(first_crossing(traj, 0, 1e3));
}

TEST(DetectBlowup, Riccati) {
  DetectOptions o;
  o.thresholds = {1e3, 1e6, 1e9};
  const auto r = detect_blowup(problem(1, 0, {1}, make_power(2)), o);
  ASSERT_EQ(r.kind, BlowupKind::BlowUp);
  EXPECT_NEAR(*r.t_blow_estimate, 1.0, 1e-3);
  EXPECT_LE(r.t_blow_interval->first, *r.t_blow_estimate);
  EXPECT_GE(r.t_blow_interval->second, *r.t_blow_estimate);
  for (std::size_t i = 1; i < r.escape_thresholds.size(); ++i) {
    EXPECT_GT(r.escape_thresholds[i].time, r.escape_thresholds[i - 1].time);
  }
}

TEST(DetectBlowup, ExponentialIsGlobal) {
  DetectOptions o;
  o.thresholds = {1e3, 1e6, 1e9};
  o.horizon = 20.0;
  const auto r = detect_blowup(problem(1, 0, {1}, make_power(1)), o);
  EXPECT_EQ(r.kind, BlowupKind::GlobalUpToHorizon);
  EXPECT_FALSE(r.t_blow_estimate);
}

TEST(DetectBlowup, OsgoodOracle) {
  const double ref = oracle::powerlog_tail_integral();
  const auto r = detect_blowup(problem(1, 0, {1}, make_power_log({1.0, 2.0, std::numbers::e})));
  ASSERT_EQ(r.kind, BlowupKind::BlowUp);
  EXPECT_NEAR(*r.t_blow_estimate, ref, 0.01 * ref);
}

TEST(DetectBlowup, HigherOrder) {
  // w'' = w^3, w(0) = 1, w'(0) = 1/sqrt(2)... use energy: w' = w^2/sqrt(2),
  // so w = 1/(1 - t/sqrt(2)) and T = sqrt(2).
  const auto r = detect_blowup(problem(2, 0, {1, 1.0 / std::sqrt(2.0)}, make_power(3)));
  ASSERT_EQ(r.kind, BlowupKind::BlowUp);
  EXPECT_NEAR(*r.t_blow_estimate, std::sqrt(2.0), 1e-4);
}

TEST(DetectBlowup, RejectsBadThresholds) {
  DetectOptions o;
  o.thresholds = {1e3, 1e2};
  EXPECT_THROW(detect_blowup(problem(1, 0, {1}, make_power(2)), o), InvalidParameter);
  o.thresholds = {5.0};
  EXPECT_THROW(detect_blowup(problem(1, 0, {1}, make_power(2)), o), InvalidParameter);
}

TEST(AitkenLimit, GeometricSequence) {
  EXPECT_DOUBLE_EQ(aitken_limit(1.0, 1.5, 1.75), 2.0);
  EXPECT_EQ(aitken_limit(1.0, 2.0, 4.0), 4.0);
}
