#include "blowup/function_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <utility>

#include "blowup/error.hpp"
#include "blowup/format.hpp"

namespace blowup {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_shifted(double shift, double y) {
  // log(shift + e^y) without overflowing for large y.
  if (y > 36.0) return y + std::log1p(shift * std::exp(-y));
  return std::log(shift + std::exp(y));
}

void check_finite_param(double v, std::string_view name) {
  if (!std::isfinite(v)) {
    throw InvalidParameter(std::string(name) + " must be finite");
  }
}

}  // namespace

std::string_view to_string(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::Power: return "Power";
    case FamilyTag::PowerLog: return "PowerLog";
    case FamilyTag::Constant: return "Constant";
    case FamilyTag::Piecewise: return "Piecewise";
    case FamilyTag::Custom: return "Custom";
  }
  return "Custom";
}

double FamilyForm::log_value_at_log_arg(double x) const {
  const double y = x - std::log(arg_scale);
  double out = std::log(coef) + params.lambda * y;
  if (params.sigma != 0.0) out += params.sigma * std::log(log_shifted(params.shift, y));
  return out;
}

ScalarFn::ScalarFn(Eval eval, FnMeta meta, std::string repr, double domain_lo)
    : eval_(std::make_shared<const Eval>(std::move(eval))),
      meta_(std::move(meta)),
      repr_(std::move(repr)),
      domain_lo_(domain_lo) {
  if (!*eval_) throw InvalidParameter("ScalarFn requires a callable");
}

ScalarFn ScalarFn::scaled_argument(double alpha) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidParameter("argument scale must be positive and finite");
  }
  ScalarFn out = *this;
  auto inner = eval_;
  out.eval_ = std::make_shared<const Eval>(
      [inner, alpha](double s) { return (*inner)(alpha * s); });
  out.repr_ = "scale_arg(" + repr_ + ", " + format_double(alpha) + ")";
  out.domain_lo_ = domain_lo_ / alpha;
  if (out.form_) out.form_->arg_scale /= alpha;
  for (double& b : out.breakpoints_) b /= alpha;
  for (Piece& p : out.pieces_) {
    p.lo /= alpha;
    p.hi /= alpha;
  }
  return out;
}

ScalarFn ScalarFn::scaled_value(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidParameter("value scale must be positive and finite");
  }
  ScalarFn out = *this;
  auto inner = eval_;
  out.eval_ = std::make_shared<const Eval>(
      [inner, c](double s) { return c * (*inner)(s); });
  out.repr_ = "scale_value(" + repr_ + ", " + format_double(c) + ")";
  if (out.form_) out.form_->coef *= c;
  for (Piece& p : out.pieces_) p.value *= c;
  return out;
}

ScalarFn make_power(double lambda) {
  check_finite_param(lambda, "lambda");
  if (lambda < 0.0) throw InvalidParameter("power exponent lambda must be >= 0");
  FnMeta meta{true, true, lambda, FamilyTag::Power};
  ScalarFn fn([lambda](double s) { return std::pow(s, lambda); }, meta,
              "power(" + format_double(lambda) + ")");
  fn.form_ = FamilyForm{PowerFamilyParams{lambda, 0.0, std::numbers::e}, 1.0, 1.0};
  return fn;
}

ScalarFn make_power_log(const PowerFamilyParams& p) {
  check_finite_param(p.lambda, "lambda");
  check_finite_param(p.sigma, "sigma");
  check_finite_param(p.shift, "shift");
  if (p.lambda < 0.0) throw InvalidParameter("powerlog exponent lambda must be >= 0");
  if (!(p.shift > 1.0)) throw InvalidParameter("powerlog shift must be > 1");
  const bool monotone = p.lambda >= 0.0 && p.sigma >= 0.0;
  FnMeta meta{monotone, monotone, p.lambda, FamilyTag::PowerLog};
  const double lambda = p.lambda;
  const double sigma = p.sigma;
  const double shift = p.shift;
  ScalarFn fn(
      [lambda, sigma, shift](double s) {
        return std::pow(s, lambda) * std::pow(std::log(shift + s), sigma);
      },
      meta,
      "powerlog(" + format_double(lambda) + ", " + format_double(sigma) + ", " +
          format_double(shift) + ")");
  fn.form_ = FamilyForm{p, 1.0, 1.0};
  return fn;
}

ScalarFn make_constant(double value) {
  check_finite_param(value, "constant");
  FnMeta meta{true, value >= 0.0,
              value > 0.0 ? std::optional<double>(0.0) : std::nullopt,
              FamilyTag::Constant};
  ScalarFn fn([value](double) { return value; }, meta,
              "constant(" + format_double(value) + ")");
  fn.pieces_ = {Piece{0.0, kInf, value}};
  return fn;
}

ScalarFn make_piecewise(std::vector<Piece> pieces) {
  if (pieces.empty()) throw InvalidParameter("piecewise needs at least one piece");
  std::sort(pieces.begin(), pieces.end(),
            [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Piece& p = pieces[i];
    if (!std::isfinite(p.lo) || p.lo < 0.0) {
      throw InvalidParameter("piecewise lower bounds must be finite and >= 0");
    }
    if (!(p.hi > p.lo)) throw InvalidParameter("piecewise pieces need lo < hi");
    check_finite_param(p.value, "piece value");
    if (i + 1 < pieces.size() && p.hi > pieces[i + 1].lo) {
      throw InvalidParameter("piecewise pieces overlap");
    }
  }

  // Walk [0, inf) including the implicit zero gaps.
  bool nondecreasing = true;
  bool nonnegative = true;
  double prev = pieces.front().lo > 0.0 ? 0.0 : pieces.front().value;
  double cursor = 0.0;
  for (const Piece& p : pieces) {
    if (p.lo > cursor) {
      if (0.0 < prev) nondecreasing = false;
      prev = 0.0;
    }
    if (p.value < prev) nondecreasing = false;
    if (p.value < 0.0) nonnegative = false;
    prev = p.value;
    cursor = p.hi;
  }
  if (std::isfinite(cursor) && prev > 0.0) nondecreasing = false;

  std::optional<double> exponent;
  if (std::isinf(pieces.back().hi) && pieces.back().value > 0.0) exponent = 0.0;

  std::vector<double> breaks;
  for (const Piece& p : pieces) {
    if (p.lo > 0.0) breaks.push_back(p.lo);
    if (std::isfinite(p.hi)) breaks.push_back(p.hi);
  }
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::string repr = "piecewise(";
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i) repr += ", ";
    repr += "(" + format_double(pieces[i].lo) + "," + format_double(pieces[i].hi) +
            "):" + format_double(pieces[i].value);
  }
  repr += ")";

  FnMeta meta{nondecreasing, nonnegative, exponent, FamilyTag::Piecewise};
  auto shared = std::make_shared<const std::vector<Piece>>(pieces);
  ScalarFn fn(
      [shared](double s) {
        const auto& ps = *shared;
        auto it = std::upper_bound(ps.begin(), ps.end(), s,
                                   [](double v, const Piece& p) { return v < p.lo; });
        if (it == ps.begin()) return 0.0;
        --it;
        return s < it->hi ? it->value : 0.0;
      },
      meta, repr);
  fn.breakpoints_ = std::move(breaks);
  fn.pieces_ = std::move(pieces);
  return fn;
}

ScalarFn make_custom(ScalarFn::Eval eval, FnMeta meta, std::string repr) {
  meta.family_tag = FamilyTag::Custom;
  return ScalarFn(std::move(eval), meta, std::move(repr));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  ScalarFn parse() {
    skip_ws();
    const std::string name = identifier();
    if (name.empty()) fail("expected a function constructor name");
    ScalarFn fn = [&] {
      if (name == "power") return parse_power();
      if (name == "powerlog") return parse_power_log();
      if (name == "constant") return parse_constant();
      if (name == "piecewise") return parse_piecewise();
      fail("unknown function constructor '" + name + "'");
    }();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after function spec");
    return fn;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw InvalidParameter("column " + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::string_view(",):").find(text_[pos_]) ==
                                      std::string_view::npos) {
      ++pos_;
    }
    const auto token = text_.substr(start, pos_ - start);
    if (auto v = parse_double(token)) return *v;
    pos_ = start;
    fail("expected a number, got '" + std::string(trim(token)) + "'");
  }

  // Reports constructor precondition failures at the argument position.
  template <typename Fn>
  ScalarFn guarded(std::size_t at, Fn&& fn) {
    try {
      return fn();
    } catch (const InvalidParameter& e) {
      pos_ = at;
      fail(e.what());
    }
  }

  ScalarFn parse_power() {
    expect('(');
    const std::size_t at = pos_;
    const double lambda = number();
    expect(')');
    return guarded(at, [&] { return make_power(lambda); });
  }

  ScalarFn parse_power_log() {
    expect('(');
    const std::size_t at = pos_;
    PowerFamilyParams p;
    p.lambda = number();
    expect(',');
    p.sigma = number();
    if (accept(',')) p.shift = number();
    expect(')');
    return guarded(at, [&] { return make_power_log(p); });
  }

  ScalarFn parse_constant() {
    expect('(');
    const double c = number();
    expect(')');
    return make_constant(c);
  }

  ScalarFn parse_piecewise() {
    expect('(');
    const std::size_t at = pos_;
    std::vector<Piece> pieces;
    do {
      expect('(');
      Piece p;
      p.lo = number();
      expect(',');
      p.hi = number();
      expect(')');
      expect(':');
      p.value = number();
      pieces.push_back(p);
    } while (accept(','));
    expect(')');
    return guarded(at, [&] { return make_piecewise(pieces); });
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ScalarFn parse_fn_spec(std::string_view text) { return SpecParser(text).parse(); }

// ---------------------------------------------------------------------------
// Validation

std::vector<double> geometric_grid(double lo, double hi, std::size_t samples) {
  if (!(lo < hi)) throw InvalidParameter("geometric_grid requires lo < hi");
  if (samples < 2) throw InvalidParameter("geometric_grid requires >= 2 samples");
  std::vector<double> grid;
  grid.reserve(samples);
  if (lo > 0.0) {
    const double ratio = std::log(hi / lo);
    for (std::size_t i = 0; i < samples; ++i) {
      grid.push_back(lo * std::exp(ratio * static_cast<double>(i) /
                                   static_cast<double>(samples - 1)));
    }
    grid.back() = hi;
    return grid;
  }
  grid.push_back(lo);
  if (!(hi > 0.0)) {
    // Entirely nonpositive range: fall back to a uniform grid.
    for (std::size_t i = 1; i < samples; ++i) {
      grid.push_back(lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(samples - 1));
    }
    return grid;
  }
  const std::size_t rest = samples - 1;
  const double start = 1e-9 * hi;
  const double ratio = std::log(hi / start);
  for (std::size_t i = 0; i < rest; ++i) {
    const double frac = rest == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(rest - 1);
    grid.push_back(start * std::exp(ratio * frac));
  }
  grid.back() = hi;
  return grid;
}

ValidationReport validate_fn(const ScalarFn& fn, double lo, double hi,
                             std::size_t samples) {
  const auto grid = geometric_grid(lo, hi, samples);
  ValidationReport report;
  report.samples = grid.size();
  double running_max = -kInf;
  for (double s : grid) {
    const double v = fn(s);
    if (!std::isfinite(v)) {
      report.non_finite_points.push_back(s);
      continue;
    }
    if (fn.meta().claims_nonnegative && v < 0.0) {
      report.negativity_violation = std::max(report.negativity_violation, -v);
    }
    if (fn.meta().claims_nondecreasing && running_max > -kInf) {
      const double excess = running_max - v - 1e-12 * (1.0 + std::abs(v));
      if (excess > 0.0) {
        report.monotonicity_violation =
            std::max(report.monotonicity_violation, running_max - v);
      }
    }
    running_max = std::max(running_max, v);
  }
  return report;
}

double sup_on(const ScalarFn& fn, double lo, double hi) {
  if (!fn.pieces().empty()) {
    // Gaps between pieces evaluate to 0, which is the floor of `best`.
    double best = 0.0;
    for (const Piece& p : fn.pieces()) {
      if (p.hi > lo && p.lo <= hi) best = std::max(best, p.value);
    }
    return best;
  }
  if (fn.meta().claims_nondecreasing) return fn(hi);
  double best = fn(lo);
  constexpr int kSamples = 4097;
  for (int i = 1; i < kSamples; ++i) {
    best = std::max(best, fn(lo + (hi - lo) * i / (kSamples - 1)));
  }
  return best;
}

}  // namespace blowup
