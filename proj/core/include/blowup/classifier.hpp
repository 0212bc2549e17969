#pragma once

// Convergence test for the growth integral
//
//     I(h, n) = int_1^inf h(s)^{-1/n} s^{1/n - 1} ds.
//
// A convergent integral puts the problem in the blow-up regime; a divergent
// one guarantees global solutions for every nonnegative initial data.

#include <optional>
#include <string_view>

#include "blowup/function_model.hpp"

namespace blowup {

enum class Verdict { Converges, Diverges, Inconclusive };
enum class ClassifyMethod { ExactFamily, NumericHeuristic };

std::string_view to_string(Verdict v);
std::string_view to_string(ClassifyMethod m);

struct ClassifyOpts {
  double diverge_cap = 1e9;
  double tail_eps = 1e-10;
  int tail_streak = 4;
  int j_max = 256;
  double panel_tol = 1e-12;
};

struct IntegralEvidence {
  double cumulative = 0.0;
  double last_panel = 0.0;
  bool cap_hit = false;
  std::optional<double> tail_bound;

  bool operator==(const IntegralEvidence&) const = default;
};

struct IntegralVerdict {
  Verdict verdict = Verdict::Inconclusive;
  /// Value of the integral; present only for Converges.
  std::optional<double> estimate;
  int panels_used = 0;
  IntegralEvidence evidence;
  ClassifyMethod method = ClassifyMethod::NumericHeuristic;

  bool operator==(const IntegralVerdict&) const = default;
};

/// h(s)^{-1/n} s^{1/n-1}. Throws SingularIntegrand when h(s) <= 0.
double kk_integrand(const ScalarFn& h, int n, double s);

/// Exact verdict for Power/PowerLog families (threshold lambda <= 1, and
/// sigma <= n at lambda = 1), dyadic-panel heuristic otherwise.
IntegralVerdict classify(const ScalarFn& h, int n, const ClassifyOpts& opts = {});

/// Classifies int_1^inf h(alpha s)^{-1/n} s^{1/n-1} ds. The verdict never
/// depends on alpha > 0.
IntegralVerdict classify_scaled(const ScalarFn& h, int n, double alpha,
                                const ClassifyOpts& opts = {});

}  // namespace blowup
