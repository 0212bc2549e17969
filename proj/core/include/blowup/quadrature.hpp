#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace blowup::quad {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct QuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  std::size_t max_intervals = 2000;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 7-15 point Gauss-Kronrod on [a, b] (a <= b). Throws
/// NumericFailure when the integrand is non-finite at a node.
QuadResult gauss_kronrod(const Integrand& f, double a, double b,
                         const QuadOptions& opts = {});

/// Same, but splits [a, b] at the given interior points first (jumps of a
/// piecewise integrand).
QuadResult gauss_kronrod_split(const Integrand& f, double a, double b,
                               std::span<const double> breaks,
                               const QuadOptions& opts = {});

}  // namespace blowup::quad
