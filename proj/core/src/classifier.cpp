#include "blowup/classifier.hpp"

#include <cmath>
#include <string>

#include "blowup/error.hpp"
#include "blowup/format.hpp"
#include "blowup/quadrature.hpp"

namespace blowup {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Converges: return "Converges";
    case Verdict::Diverges: return "Diverges";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string_view to_string(ClassifyMethod m) {
  return m == ClassifyMethod::ExactFamily ? "ExactFamily" : "NumericHeuristic";
}

double kk_integrand(const ScalarFn& h, int n, double s) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  const double hs = h(s);
  if (!(hs > 0.0)) {
    throw SingularIntegrand(s, "h(s) <= 0 at s=" + format_double(s) +
                                   " makes the integrand singular");
  }
  if (n == 1) return 1.0 / hs;
  const double inv_n = 1.0 / n;
  return std::pow(hs, -inv_n) * std::pow(s, inv_n - 1.0);
}

namespace {

bool is_exact_family(const ScalarFn& h) {
  return h.family_form() &&
         (h.family_tag() == FamilyTag::Power || h.family_tag() == FamilyTag::PowerLog);
}

// Value of the convergent PowerLog integral, computed in x = log s where the
// integrand is exp((x - log h(e^x)) / n). Panels [0,1], [1,2], [2,4], ... in x;
// the remainder is closed with a geometric tail from the last panel ratio.
struct FamilyEstimate {
  double value;
  int panels;
  double last_panel;
  double tail;
};

FamilyEstimate power_log_estimate(const FamilyForm& form, int n) {
  const double inv_n = 1.0 / n;
  auto phi = [&](double x) {
    return std::exp(inv_n * (x - form.log_value_at_log_arg(x)));
  };
  quad::QuadOptions qo{0.0, 1e-13, 4000};
  double cumulative = 0.0;
  double prev = 0.0;
  double last = 0.0;
  int panels = 0;
  double lo = 0.0;
  double hi = 1.0;
  constexpr int kMaxPanels = 72;
  for (; panels < kMaxPanels; ++panels) {
    // Far panels only need to be accurate relative to the running sum.
    qo.abs_tol = 1e-16 * cumulative;
    last = quad::gauss_kronrod(phi, lo, hi, qo).value;
    cumulative += last;
    if (panels > 4 && last <= 1e-17 * cumulative) {
      ++panels;
      break;
    }
    prev = last;
    lo = hi;
    hi *= 2.0;
  }
  double tail = 0.0;
  if (prev > 0.0) {
    const double r = last / prev;
    if (r > 0.0 && r < 1.0) tail = last * r / (1.0 - r);
  }
  return {cumulative + tail, panels, last, tail};
}

IntegralVerdict classify_exact(const ScalarFn& h, int n) {
  const FamilyForm& form = *h.family_form();
  const double lambda = form.params.lambda;
  const double sigma = h.family_tag() == FamilyTag::PowerLog ? form.params.sigma : 0.0;

  // Integrand ~ s^{(1-lambda)/n - 1} log(s)^{-sigma/n}.
  bool diverges = false;
  if (lambda < 1.0) {
    diverges = true;
  } else if (lambda == 1.0) {
    diverges = sigma <= static_cast<double>(n);
  }

  IntegralVerdict out;
  out.method = ClassifyMethod::ExactFamily;
  if (diverges) {
    out.verdict = Verdict::Diverges;
    return out;
  }
  out.verdict = Verdict::Converges;
  if (sigma == 0.0) {
    const double value = std::pow(form.coef, -1.0 / n) *
                         std::pow(form.arg_scale, lambda / n) * n / (lambda - 1.0);
    out.estimate = value;
    out.evidence.cumulative = value;
    return out;
  }
  const auto est = power_log_estimate(form, n);
  out.estimate = est.value;
  out.panels_used = est.panels;
  out.evidence.cumulative = est.value - est.tail;
  out.evidence.last_panel = est.last_panel;
  out.evidence.tail_bound = est.tail;
  return out;
}

bool decays_monotonically(const ScalarFn& h, int n, double a, double b) {
  constexpr int kSamples = 9;
  double prev = kk_integrand(h, n, a);
  for (int i = 1; i < kSamples; ++i) {
    const double s = a + (b - a) * i / (kSamples - 1);
    const double v = kk_integrand(h, n, s);
    if (v > prev * (1.0 + 1e-12)) return false;
    prev = v;
  }
  return true;
}

IntegralVerdict classify_numeric(const ScalarFn& h, int n, const ClassifyOpts& opts) {
  IntegralVerdict out;
  out.method = ClassifyMethod::NumericHeuristic;
  const quad::QuadOptions qo{0.0, opts.panel_tol, 2000};
  auto integrand = [&](double s) { return kk_integrand(h, n, s); };

  double cumulative = 0.0;
  double prev = -1.0;
  int streak = 0;
  for (int j = 0; j <= opts.j_max; ++j) {
    const double a = std::ldexp(1.0, j);
    const double b = 2.0 * a;
    const auto panel = quad::gauss_kronrod_split(integrand, a, b, h.breakpoints(), qo);
    if (!std::isfinite(panel.value)) {
      throw NumericFailure(a, "panel quadrature is not finite on [" + format_double(a) +
                                  ", " + format_double(b) + "]");
    }
    cumulative += panel.value;
    out.panels_used = j + 1;
    out.evidence.cumulative = cumulative;
    out.evidence.last_panel = panel.value;

    if (cumulative >= opts.diverge_cap) {
      out.verdict = Verdict::Diverges;
      out.evidence.cap_hit = true;
      return out;
    }

    const double rel = panel.value / std::max(cumulative, 1.0);
    streak = rel < opts.tail_eps ? streak + 1 : 0;
    if (streak >= opts.tail_streak && prev >= 0.0) {
      const double ratio = prev > 0.0 ? panel.value / prev : 0.0;
      if (ratio < 1.0 && decays_monotonically(h, n, a, b)) {
        const double tail = panel.value * ratio / (1.0 - ratio);
        out.verdict = Verdict::Converges;
        out.evidence.tail_bound = tail;
        out.estimate = cumulative + tail;
        return out;
      }
    }
    prev = panel.value;
  }
  out.verdict = Verdict::Inconclusive;
  return out;
}

}  // namespace

IntegralVerdict classify(const ScalarFn& h, int n, const ClassifyOpts& opts) {
  if (n < 1) throw InvalidParameter("n must be >= 1");
  if (opts.j_max < 0 || opts.tail_streak < 1 || !(opts.diverge_cap > 0.0) ||
      !(opts.tail_eps > 0.0)) {
    throw InvalidParameter("invalid classification options");
  }
  if (is_exact_family(h)) return classify_exact(h, n);
  return classify_numeric(h, n, opts);
}

IntegralVerdict classify_scaled(const ScalarFn& h, int n, double alpha,
                                const ClassifyOpts& opts) {
  if (!(alpha > 0.0)) throw InvalidParameter("alpha must be > 0");
  return classify(h.scaled_argument(alpha), n, opts);
}

}  // namespace blowup
