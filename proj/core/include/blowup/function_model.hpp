#pragma once

// Scalar functions h (nonlinearity), q (time coefficient) and g (autonomous
// majorant) together with the structural metadata the comparison results
// depend on.

#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blowup {

enum class FamilyTag { Power, PowerLog, Constant, Piecewise, Custom };

std::string_view to_string(FamilyTag tag);

/// Parameters of s^lambda * log(shift + s)^sigma.
struct PowerFamilyParams {
  double lambda = 1.0;
  double sigma = 0.0;
  double shift = std::numbers::e;

  bool operator==(const PowerFamilyParams&) const = default;
};

/// Closed form coef * base(s / arg_scale) of a Power or PowerLog function.
/// Scaling operations keep this form exact so classification can stay exact.
struct FamilyForm {
  PowerFamilyParams params;
  double coef = 1.0;
  double arg_scale = 1.0;

  /// log of the function value at s = exp(x); stays finite where s overflows.
  double log_value_at_log_arg(double x) const;
};

struct FnMeta {
  bool claims_nondecreasing = false;
  bool claims_nonnegative = false;
  std::optional<double> asymptotic_exponent;
  FamilyTag family_tag = FamilyTag::Custom;
};

/// One constant stretch [lo, hi) of a piecewise function.
struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
};

/// Immutable, thread-shareable real function of one variable. Evaluation
/// below domain_lo() is a caller error.
class ScalarFn {
 public:
  using Eval = std::function<double(double)>;

  ScalarFn(Eval eval, FnMeta meta, std::string repr = "custom",
           double domain_lo = 0.0);

  double operator()(double s) const { return (*eval_)(s); }
  double eval(double s) const { return (*eval_)(s); }

  const FnMeta& meta() const noexcept { return meta_; }
  FamilyTag family_tag() const noexcept { return meta_.family_tag; }
  double domain_lo() const noexcept { return domain_lo_; }
  const std::string& repr() const noexcept { return repr_; }
  const std::optional<FamilyForm>& family_form() const noexcept {
    return form_;
  }
  /// Finite jump locations, sorted; empty for continuous functions.
  const std::vector<double>& breakpoints() const noexcept {
    return breakpoints_;
  }
  /// Pieces of a Piecewise function (empty otherwise), after any scaling.
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

  /// s -> f(alpha * s), alpha > 0.
  ScalarFn scaled_argument(double alpha) const;
  /// s -> c * f(s), c > 0.
  ScalarFn scaled_value(double c) const;

 private:
  friend ScalarFn make_power(double);
  friend ScalarFn make_power_log(const PowerFamilyParams&);
  friend ScalarFn make_constant(double);
  friend ScalarFn make_piecewise(std::vector<Piece>);

  std::shared_ptr<const Eval> eval_;
  FnMeta meta_;
  std::string repr_;
  double domain_lo_ = 0.0;
  std::optional<FamilyForm> form_;
  std::vector<double> breakpoints_;
  std::vector<Piece> pieces_;
};

ScalarFn make_power(double lambda);
ScalarFn make_power_log(const PowerFamilyParams& params);
ScalarFn make_constant(double value);
/// Pieces must be non-overlapping with lo < hi and lo >= 0; the function is 0
/// outside every piece.
ScalarFn make_piecewise(std::vector<Piece> pieces);
ScalarFn make_custom(ScalarFn::Eval eval, FnMeta meta,
                     std::string repr = "custom");

/// Parses one of `power(l)`, `powerlog(l, s[, shift])`, `constant(c)`,
/// `piecewise((lo,hi):v, ...)`. Throws InvalidParameter carrying the column.
ScalarFn parse_fn_spec(std::string_view text);

struct ValidationReport {
  std::size_t samples = 0;
  /// Largest amount by which an earlier sample exceeds a later one (only when
  /// the function claims to be nondecreasing).
  double monotonicity_violation = 0.0;
  /// Magnitude of the most negative sample (only when nonnegativity is
  /// claimed).
  double negativity_violation = 0.0;
  std::vector<double> non_finite_points;

  bool ok() const {
    return monotonicity_violation == 0.0 && negativity_violation == 0.0 &&
           non_finite_points.empty();
  }
};

/// Deterministic grid on [lo, hi]; geometric so that both small and large
/// scales are visited. When lo <= 0 the first point is lo and the rest are
/// geometric on [1e-9 * hi, hi].
std::vector<double> geometric_grid(double lo, double hi, std::size_t samples);

ValidationReport validate_fn(const ScalarFn& fn, double lo, double hi,
                             std::size_t samples);

/// Upper bound of fn on [lo, hi]: exact for Constant and Piecewise, the
/// right endpoint for claimed-nondecreasing functions, sampled otherwise.
double sup_on(const ScalarFn& fn, double lo, double hi);

}  // namespace blowup
