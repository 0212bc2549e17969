#include "blowup/volterra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "blowup/error.hpp"

namespace blowup {

double factorial(int n) {
  double out = 1.0;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

double taylor_polynomial(std::span<const double> coeffs, double t) {
  // Horner on c_l / l!.
  double acc = 0.0;
  for (std::size_t l = coeffs.size(); l-- > 0;) {
    acc = acc * t / static_cast<double>(l + 1) + coeffs[l];
  }
  return acc;
}

namespace {

using Cubic = std::array<double, 4>;  // phi(t_i + s) = sum c_r s^r

Cubic hermite_coeffs(double f0, double f1, double d0, double d1, double h) {
  const double slope = (f1 - f0) / h;
  return {f0, d0, (3.0 * slope - 2.0 * d0 - d1) / h, (d0 + d1 - 2.0 * slope) / (h * h)};
}

// Interpolating polynomial through (s_j, f_j) expanded in monomials of s.
Cubic lagrange_coeffs(std::span<const double> s, std::span<const double> f) {
  const std::size_t k = s.size();
  std::array<double, 4> dd{};
  for (std::size_t j = 0; j < k; ++j) dd[j] = f[j];
  for (std::size_t level = 1; level < k; ++level) {
    for (std::size_t j = k - 1; j >= level; --j) {
      dd[j] = (dd[j] - dd[j - 1]) / (s[j] - s[j - level]);
    }
  }
  // Newton form -> monomials: accumulate prod (s - s_j).
  Cubic out{};
  std::array<double, 4> basis{1.0, 0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t r = 0; r < 4; ++r) out[r] += dd[j] * basis[r];
    if (j + 1 == k) break;
    std::array<double, 4> next{};
    for (std::size_t r = 0; r < 4; ++r) {
      if (r + 1 < 4) next[r + 1] += basis[r];
      next[r] -= s[j] * basis[r];
    }
    basis = next;
  }
  return out;
}

// Cubic on [t_i, t_{i+1}] from samples of the smooth segment [lo, hi]. At the
// segment's right end a jump node contributes its left limit.
Cubic local_cubic(std::span<const double> phi, std::span<const double> grid,
                  std::span<const double> dphi, std::span<const double> phi_left,
                  std::size_t lo, std::size_t hi, std::size_t i) {
  auto value = [&](std::size_t j) { return j == hi && !phi_left.empty() ? phi_left[j] : phi[j]; };
  const double h = grid[i + 1] - grid[i];
  if (!dphi.empty()) return hermite_coeffs(value(i), value(i + 1), dphi[i], dphi[i + 1], h);
  const std::size_t n = hi - lo + 1;
  const std::size_t width = std::min<std::size_t>(4, n);
  std::size_t start = i > lo ? i - 1 : lo;
  if (start + width > hi + 1) start = hi + 1 - width;
  std::array<double, 4> s{};
  std::array<double, 4> f{};
  for (std::size_t j = 0; j < width; ++j) {
    s[j] = grid[start + j] - grid[i];
    f[j] = value(start + j);
  }
  return lagrange_coeffs(std::span(s.data(), width), std::span(f.data(), width));
}

void check_inputs(std::span<const double> phi, int p, std::span<const double> grid,
                  std::span<const double> dphi, std::span<const double> phi_left) {
  if (p < 1) throw InvalidParameter("kernel order p must be >= 1");
  if (grid.empty() || phi.size() != grid.size()) {
    throw InvalidParameter("phi and grid must be non-empty and the same length");
  }
  if (!dphi.empty() && dphi.size() != grid.size()) {
    throw InvalidParameter("derivative samples must match the grid length");
  }
  if (!phi_left.empty() && phi_left.size() != grid.size()) {
    throw InvalidParameter("left-limit samples must match the grid length");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(phi[i]) || (!dphi.empty() && !std::isfinite(dphi[i])) ||
        (!phi_left.empty() && !std::isfinite(phi_left[i]))) {
      throw NumericFailure(grid[i], "non-finite sample in Volterra integrand");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw InvalidParameter("grid must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<std::vector<double>> repeated_integrals(std::span<const double> phi, int p,
                                                    std::span<const double> grid,
                                                    std::span<const double> dphi,
                                                    std::span<const double> phi_left) {
  check_inputs(phi, p, grid, dphi, phi_left);
  const std::size_t n = grid.size();
  auto jumps_at = [&](std::size_t j) { return !phi_left.empty() && phi_left[j] != phi[j]; };
  std::size_t seg_lo = 0;
  std::size_t seg_hi = 0;
  std::vector<std::vector<double>> out(static_cast<std::size_t>(p),
                                       std::vector<double>(n, 0.0));
  // Kernel moments: int_0^h (h-s)^{q-1} s^r ds / (q-1)! = r! h^{q+r} / (q+r)!.
  const auto P = static_cast<std::size_t>(p);
  std::vector<double> moment((P + 1) * 4);
  for (int q = 1; q <= p; ++q) {
    for (int r = 0; r < 4; ++r) {
      moment[static_cast<std::size_t>(q * 4 + r)] = factorial(r) / factorial(q + r);
    }
  }
  std::vector<double> current(P + 1, 0.0);  // I_q(t_i), q >= 1
  std::vector<double> next(P + 1, 0.0);
  std::vector<double> hpow(P + 4, 1.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = grid[i + 1] - grid[i];
    if (i == seg_hi) {
      seg_lo = i;
      seg_hi = i + 1;
      while (seg_hi + 1 < n && !jumps_at(seg_hi)) ++seg_hi;
    }
    const Cubic c = local_cubic(phi, grid, dphi, phi_left, seg_lo, seg_hi, i);
    for (std::size_t e = 1; e < hpow.size(); ++e) hpow[e] = hpow[e - 1] * h;
    for (std::size_t q = 1; q <= P; ++q) {
      // Taylor shift of the lower repeated integrals.
      double acc = 0.0;
      double hl = 1.0;
      for (std::size_t l = 0; l < q; ++l) {
        acc += current[q - l] * hl;
        hl *= h / static_cast<double>(l + 1);
      }
      double local = 0.0;
      for (std::size_t r = 0; r < 4; ++r) local += c[r] * moment[q * 4 + r] * hpow[q + r];
      next[q] = acc + local;
    }
    std::swap(current, next);
    for (std::size_t q = 1; q <= P; ++q) out[q - 1][i + 1] = current[q];
  }
  return out;
}

std::vector<double> weighted_volterra(std::span<const double> phi, int p,
                                      std::span<const double> grid,
                                      std::span<const double> dphi,
                                      std::span<const double> phi_left) {
  auto all = repeated_integrals(phi, p, grid, dphi, phi_left);
  return std::move(all.back());
}

}  // namespace blowup
