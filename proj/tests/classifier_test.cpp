#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "blowup/classifier.hpp"
#include "blowup/error.hpp"
#include "oracles.hpp"

using namespace blowup;

TEST(KkIntegrand, Values) {
  EXPECT_DOUBLE_EQ(kk_integrand(make_power(2.0), 1, 4.0), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(kk_integrand(make_power(1.0), 2, 9.0), 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(kk_integrand(make_power(3.0), 2, 2.0), 0.25);
}

TEST(KkIntegrand, SingularWhenNonPositive) {
  const auto h = make_piecewise({{0.0, 1.0, 1.0}});
  try {
    kk_integrand(h, 1, 2.0);
    FAIL();
  } catch (const SingularIntegrand& e) {
    EXPECT_EQ(e.point(), 2.0);
  }
}

TEST(Classify, PowerExamples) {
  const auto c2 = classify(make_power(2.0), 1);
  EXPECT_EQ(c2.verdict, Verdict::Converges);
  EXPECT_EQ(c2.method, ClassifyMethod::ExactFamily);
  ASSERT_TRUE(c2.estimate);
  EXPECT_NEAR(*c2.estimate, 1.0, 1e-14);

  EXPECT_EQ(classify(make_power(1.0), 1).verdict, Verdict::Diverges);
  const auto c3 = classify(make_power(3.0), 2);
  EXPECT_EQ(c3.verdict, Verdict::Converges);
  EXPECT_NEAR(*c3.estimate, 1.0, 1e-14);
}

TEST(Classify, PowerThresholdIsLambdaOne) {
  for (int n = 1; n <= 4; ++n) {
    for (double lambda : {0.0, 0.5, 1.0, n - 0.5, double(n), n + 0.5, 2.0 * n}) {
      const auto v = classify(make_power(lambda), n);
      EXPECT_EQ(v.verdict, lambda <= 1.0 ? Verdict::Diverges : Verdict::Converges)
          << "n=" << n << " lambda=" << lambda;
      EXPECT_EQ(v.method, ClassifyMethod::ExactFamily);
      EXPECT_EQ(v.estimate.has_value(), v.verdict == Verdict::Converges);
    }
  }
}

TEST(Classify, PowerLogBorderline) {
  const double e = std::numbers::e;
  for (int n = 1; n <= 3; ++n) {
    for (double sigma : {0.0, 0.5, double(n), n + 0.5, n + 2.0}) {
      const auto v = classify(make_power_log({1.0, sigma, e}), n);
      EXPECT_EQ(v.verdict, sigma <= n ? Verdict::Diverges : Verdict::Converges)
          << "n=" << n << " sigma=" << sigma;
    }
  }
  EXPECT_EQ(classify(make_power_log({0.5, 10.0, e}), 1).verdict, Verdict::Diverges);
  EXPECT_EQ(classify(make_power_log({1.5, -10.0, e}), 1).verdict, Verdict::Converges);
}

TEST(Classify, PowerLogEstimateMatchesOracle) {
  const double ref = oracle::powerlog_tail_integral();
  EXPECT_NEAR(ref, oracle::powerlog_tail_integral_direct(), 1e-9);
  const auto v = classify(make_power_log({1.0, 2.0, std::numbers::e}), 1);
  ASSERT_EQ(v.verdict, Verdict::Converges);
  EXPECT_NEAR(*v.estimate, ref, 5e-3 * ref);
  EXPECT_NEAR(*v.estimate, ref, 1e-8 * ref);
}

TEST(Classify, PowerEstimatesMatchClosedForm) {
  for (int n = 1; n <= 3; ++n) {
    for (double lambda : {1.5, 2.0, 3.0, 7.0}) {
      const auto v = classify(make_power(lambda), n);
      // int_1^inf s^{-(lambda-1)/n - 1} ds = n / (lambda - 1)
      EXPECT_NEAR(*v.estimate, n / (lambda - 1.0), 1e-12);
    }
  }
}

TEST(Classify, NumericHeuristicOnCustom) {
  FnMeta meta{true, true, std::nullopt, FamilyTag::Custom};
  const auto conv = make_custom([](double s) { return s * s + 1.0; }, meta);
  const auto v = classify(conv, 1);
  EXPECT_EQ(v.method, ClassifyMethod::NumericHeuristic);
  ASSERT_EQ(v.verdict, Verdict::Converges);
  EXPECT_NEAR(*v.estimate, std::numbers::pi / 4.0, 1e-6);
  EXPECT_LT(v.evidence.last_panel / std::max(v.evidence.cumulative, 1.0), 1e-10);

  const auto div = make_custom([](double s) { return std::sqrt(s) + 1.0; }, meta);
  const auto d = classify(div, 1);
  EXPECT_EQ(d.verdict, Verdict::Diverges);
  EXPECT_TRUE(d.evidence.cap_hit);
  EXPECT_GE(d.evidence.cumulative, 1e9);
  EXPECT_FALSE(d.estimate);

  // Logarithmic divergence: about 177 after every dyadic panel, far from the cap.
  const auto slow = classify(make_custom([](double s) { return s + 1.0; }, meta), 1);
  EXPECT_EQ(slow.verdict, Verdict::Inconclusive);
  EXPECT_FALSE(slow.evidence.cap_hit);
}

TEST(Classify, NumericBorderlineIsInconclusive) {
  // s log^2 s decays too slowly to certify and too slowly to reach the cap.
  FnMeta meta{true, true, std::nullopt, FamilyTag::Custom};
  const auto h = make_custom(
      [](double s) {
        const double l = std::log(std::numbers::e + s);
        return s * l * l;
      },
      meta);
  EXPECT_EQ(classify(h, 1).verdict, Verdict::Inconclusive);
}

TEST(Classify, ConstantDivergesNumerically) {
  for (int n = 1; n <= 3; ++n) {
    EXPECT_EQ(classify(make_constant(2.0), n).verdict, Verdict::Diverges);
  }
}

TEST(ClassifyScaled, Examples) {
  EXPECT_EQ(classify_scaled(make_power(1.0), 1, 10.0).verdict, Verdict::Diverges);
  const auto v = classify_scaled(make_power(2.0), 1, 2.0);
  EXPECT_EQ(v.verdict, Verdict::Converges);
  EXPECT_NEAR(*v.estimate, 0.25, 1e-14);
  EXPECT_EQ(classify_scaled(make_power(2.0), 1, 1.0), classify(make_power(2.0), 1));
}

TEST(ClassifyScaled, VerdictInvariantUnderScaling) {
  const double e = std::numbers::e;
  const std::vector<ScalarFn> family = {
      make_power(0.0),  make_power(0.5),  make_power(1.0),  make_power(2.0),
      make_power(3.0),  make_power_log({1.0, 0.5, e}),     make_power_log({1.0, 2.0, e}),
      make_power_log({1.0, 3.0, e}), make_power_log({2.0, 1.0, 3.0}), make_constant(1.0),
      make_piecewise({{0.0, 1.0, 0.5}, {1.0, std::numeric_limits<double>::infinity(), 2.0}})};
  for (const auto& h : family) {
    for (int n = 1; n <= 3; ++n) {
      const auto base = classify(h, n);
      for (double alpha : {0.5, 2.0, 10.0}) {
        const auto s = classify_scaled(h, n, alpha);
        if (base.verdict != Verdict::Inconclusive && s.verdict != Verdict::Inconclusive) {
          EXPECT_EQ(base.verdict, s.verdict) << h.repr() << " n=" << n << " alpha=" << alpha;
        }
      }
    }
  }
}

TEST(Classify, Deterministic) {
  const auto h = make_power_log({1.0, 2.0, std::numbers::e});
  EXPECT_EQ(classify(h, 1), classify(h, 1));
  FnMeta meta{true, true, std::nullopt, FamilyTag::Custom};
  const auto c = make_custom([](double s) { return s * s * s; }, meta);
  EXPECT_EQ(classify(c, 2), classify(c, 2));
}
