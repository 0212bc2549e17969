#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "blowup/error.hpp"
#include "blowup/theorem.hpp"

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

Trajectory sampled(double T, std::size_t intervals, int order,
                   const std::function<double(double, int)>& f) {
  std::vector<double> grid, values, top;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double t = T * double(i) / double(intervals);
    grid.push_back(t);
    for (int c = 0; c < order; ++c) values.push_back(f(t, c));
    top.push_back(f(t, order));
  }
  return Trajectory(grid, values, top, order);
}

}  // namespace

TEST(ReduceProblem, Examples) {
  auto r = reduce_problem(problem(3, 1, {5, 1, 2}, make_power(1)));
  EXPECT_EQ(r.n, 2);
  EXPECT_EQ(r.a_reduced, (std::vector<double>{1, 2}));
  r = reduce_problem(problem(2, 0, {1, 0}, make_power(1)));
  EXPECT_EQ(r.n, 2);
  EXPECT_EQ(r.a_reduced, (std::vector<double>{1, 0}));
  r = reduce_problem(problem(4, 3, {0, 0, 0, 1}, make_power(1)));
  EXPECT_EQ(r.n, 1);
  EXPECT_EQ(r.a_reduced, (std::vector<double>{1}));
}

TEST(LiftSolution, Examples) {
  const auto ones = sampled(2.0, 20, 1, [](double, int c) { return c == 0 ? 1.0 : 0.0; });
  const std::vector<double> zero{0.0};
  const auto v1 = lift_solution(ones, zero, 1);
  ASSERT_EQ(v1.order(), 2);
  for (std::size_t i = 0; i < v1.size(); ++i) {
    EXPECT_NEAR(v1.value(i, 0), v1.time(i), 1e-15);
    EXPECT_EQ(v1.value(i, 1), 1.0);
  }
  const std::vector<double> a_low{1.0, 0.0};
  const auto v2 = lift_solution(ones, a_low, 2);
  for (std::size_t i = 0; i < v2.size(); ++i) {
    const double t = v2.time(i);
    EXPECT_NEAR(v2.value(i, 0), 1.0 + t * t / 2, 1e-14);
    EXPECT_NEAR(v2.value(i, 1), t, 1e-14);
  }
  const auto same = lift_solution(ones, {}, 0);
  EXPECT_EQ(same.grid(), ones.grid());
  EXPECT_EQ(same.component(0), ones.component(0));
}

TEST(LiftSolution, DifferentiationRoundTrip) {
  const auto u = sampled(1.0, 2000, 1, [](double t, int c) {
    return c == 0 ? std::sin(t) + 2.0 : std::cos(t);
  });
  const std::vector<double> a_low{0.5, 0.25};
  const auto v = lift_solution(u, a_low, 2);
  // Second differences of v recover u.
  const double h = v.time(1) - v.time(0);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const double d2 = (v.value(i + 1, 0) - 2 * v.value(i, 0) + v.value(i - 1, 0)) / (h * h);
    EXPECT_NEAR(d2, u.value(i, 0), 1e-6 * std::abs(u.value(i, 0)));
  }
}

TEST(Majorization, ExponentialClosedForm) {
  const std::vector<double> a{1.0}, b{2.0};
  MajorizationOptions o;
  o.levels = 5;
  const auto t = majorization_experiment(make_constant(1.0), make_power(1.0), 1, a, b, o);
  ASSERT_EQ(t.rows.size(), 6u);
  EXPECT_TRUE(t.passed);
  EXPECT_FALSE(t.level_unreachable);
  for (const auto& row : t.rows) {
    EXPECT_NEAR(row.t_j, row.j * std::log(2.0), 1e-8);
    EXPECT_NEAR(row.tau_j, 2 * row.j * std::log(2.0), 1e-8);
    if (row.j > 0) EXPECT_NEAR(row.eps_j, std::log(2.0), 1e-8);
    EXPECT_NEAR(row.u_derivs[0], std::ldexp(1.0, row.j), 1e-8 * std::ldexp(1.0, row.j));
    const double w = 2.0 * std::ldexp(1.0, 4 * row.j);
    EXPECT_NEAR(row.w_derivs[0], w, 1e-7 * w);
    EXPECT_GT(row.min_margin, 0.0);
  }
}

TEST(Majorization, LinearClosedForm) {
  const std::vector<double> a{1.0}, b{2.0};
  MajorizationOptions o;
  o.levels = 3;
  const auto t = majorization_experiment(make_constant(1.0), make_constant(1.0), 1, a, b, o);
  ASSERT_EQ(t.rows.size(), 4u);
  for (const auto& row : t.rows) {
    EXPECT_NEAR(row.t_j, std::ldexp(1.0, row.j) - 1.0, 1e-9);
    EXPECT_NEAR(row.w_derivs[0], 2.0 + row.tau_j, 1e-9);
    EXPECT_GT(row.min_margin, 0.0);
  }
  EXPECT_TRUE(t.passed);
}

TEST(Majorization, ZeroLevels) {
  const std::vector<double> a{1.0, 0.5}, b{1.5, 2.0};
  MajorizationOptions o;
  o.levels = 0;
  const auto t = majorization_experiment(make_constant(1.0), make_power(1.0), 2, a, b, o);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].j, 0);
  EXPECT_DOUBLE_EQ(t.rows[0].min_margin, 0.5);
  EXPECT_TRUE(t.passed);
}

TEST(Majorization, LevelPlacementAndReparameterization) {
  const auto q = make_piecewise({{0.0, 1.0, 0.5}, {1.0, std::numeric_limits<double>::infinity(), 3.0}});
  const std::vector<double> a{0.0, 1.0}, b{1.0, 2.0};
  MajorizationOptions o;
  o.levels = 8;
  o.horizon = 20.0;
  const auto t = majorization_experiment(q, make_power(1.0), 2, a, b, o);
  EXPECT_GT(t.t0, 0.0);
  EXPECT_TRUE(t.passed);
  double eps_sum = 0.0;
  for (std::size_t j = 0; j < t.rows.size(); ++j) {
    const auto& row = t.rows[j];
    EXPECT_NEAR(row.u_derivs[0] / t.u_t0, std::pow(2.0, row.j), 1e-9 * std::pow(2.0, row.j));
    if (j > 0) {
      EXPECT_GT(row.t_j, t.rows[j - 1].t_j);
      EXPECT_GE(row.tau_j - t.rows[j - 1].tau_j, row.t_j - t.rows[j - 1].t_j);
      eps_sum += row.eps_j;
    }
    EXPECT_GE(row.tau_j, row.t_j - t.t0);
  }
  // int_0^{t_J} q
  const double tJ = t.rows.back().t_j;
  const double q_int = tJ <= 1.0 ? 0.5 * tJ : 0.5 + 3.0 * (tJ - 1.0);
  EXPECT_LE(eps_sum, q_int + 1e-12);
}

TEST(Majorization, StagnantSolution) {
  const std::vector<double> a{0.0}, b{1.0};
  MajorizationOptions o;
  o.levels = 3;
  o.horizon = 2.0;
  const auto t = majorization_experiment(make_constant(1.0), make_power(1.0), 1, a, b, o);
  EXPECT_TRUE(t.level_unreachable);
  EXPECT_TRUE(t.rows.empty());
}

TEST(Majorization, RejectsSmallB) {
  const std::vector<double> a{1.0}, b{1.0};
  EXPECT_THROW(majorization_experiment(make_constant(1.0), make_power(1.0), 1, a, b),
               InvalidParameter);
}

TEST(Pipeline, LinearSecondOrderGlobal) {
  const auto r = run_pipeline(problem(2, 0, {1, 1}, make_power(1)), 5.0);
  EXPECT_EQ(r.verdict, PipelineVerdict::GlobalConstructed);
  ASSERT_TRUE(r.constructed);
  ASSERT_TRUE(r.consistency_abs);
  EXPECT_LE(*r.consistency_abs, 1e-6 * std::exp(5.0));
  for (std::size_t i = 0; i < r.constructed->size(); ++i) {
    const double t = r.constructed->time(i);
    EXPECT_NEAR(r.constructed->value(i, 0), std::exp(t), 1e-6 * std::exp(t));
  }
  EXPECT_TRUE(r.consistent);
  EXPECT_TRUE(r.checks_passed());
}

TEST(Pipeline, RiccatiBlowsUp) {
  const auto r = run_pipeline(problem(1, 0, {1}, make_power(2)), 5.0);
  EXPECT_EQ(r.verdict, PipelineVerdict::BlowUpDetected);
  ASSERT_TRUE(r.blowup);
  EXPECT_NEAR(*r.blowup->t_blow_estimate, 1.0, 1e-3);
  EXPECT_EQ(r.regime, "regime: blow-up for large data");
  EXPECT_FALSE(r.small_data);
}

TEST(Pipeline, LiftedThirdOrder) {
  const auto r = run_pipeline(problem(3, 1, {5, 1, 1}, make_power(1)), 5.0);
  ASSERT_EQ(r.verdict, PipelineVerdict::GlobalConstructed);
  // Reduced u'' = u, u(0) = u'(0) = 1 gives u = e^t, and v = 5 + e^t - 1.
  for (std::size_t i = 0; i < r.constructed->size(); ++i) {
    const double t = r.constructed->time(i);
    EXPECT_NEAR(r.constructed->value(i, 1), std::exp(t), 1e-7 * std::exp(t));
    EXPECT_NEAR(r.constructed->value(i, 0), 4.0 + std::exp(t), 1e-7 * std::exp(t));
  }
  EXPECT_TRUE(r.checks_passed());
}

TEST(Pipeline, GeneralRhsSandwich) {
  auto p = problem(2, 0, {1, 0}, make_power(1));
  p.f_override = [](double t, std::span<const double> x) {
    return std::max(0.0, x[0]) * (0.5 + 0.5 * std::sin(t) * std::sin(t));
  };
  const auto r = run_pipeline(p, 3.0);
  ASSERT_EQ(r.verdict, PipelineVerdict::GlobalConstructed);
  ASSERT_TRUE(r.sandwich_violation);
  EXPECT_LE(*r.sandwich_violation, 1e-9);
  EXPECT_TRUE(r.checks_passed());
}

TEST(Pipeline, SmallDataFlag) {
  const auto r = run_pipeline(problem(1, 0, {0.5}, make_power(2)), 5.0);
  EXPECT_TRUE(r.small_data);
  EXPECT_EQ(r.verdict, PipelineVerdict::BlowUpDetected);
  EXPECT_NEAR(*r.blowup->t_blow_estimate, 2.0, 2e-3);
}
