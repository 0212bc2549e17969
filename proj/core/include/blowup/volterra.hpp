#pragma once

// Cauchy kernel operator
//
//     V_p[phi](t) = 1/(p-1)! * int_0^t (t - tau)^{p-1} phi(tau) dtau,
//
// i.e. p-fold repeated integration from 0. Sampled phi is replaced on each grid
// interval by a cubic (Hermite when derivative samples are supplied, local
// 4-point Lagrange otherwise) and the kernel is integrated exactly against it.

#include <span>
#include <vector>

namespace blowup {

/// V_p[phi] at every grid point. grid must be strictly increasing and start
/// where the integration starts; `dphi`, when non-empty, holds phi' samples.
/// `phi_left`, when non-empty, holds left limits: wherever it differs from
/// phi the integrand jumps there and no interpolant straddles the node.
std::vector<double> weighted_volterra(std::span<const double> phi, int p,
                                      std::span<const double> grid,
                                      std::span<const double> dphi = {},
                                      std::span<const double> phi_left = {});

/// V_1..V_p in one sweep; result[q-1] is V_q[phi].
std::vector<std::vector<double>> repeated_integrals(std::span<const double> phi, int p,
                                                    std::span<const double> grid,
                                                    std::span<const double> dphi = {},
                                                    std::span<const double> phi_left = {});

/// Sum_{l<count} coeffs[l] t^l / l!.
double taylor_polynomial(std::span<const double> coeffs, double t);

double factorial(int n);

}  // namespace blowup
