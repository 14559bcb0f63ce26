// SPDX-License-Identifier: Apache-2.0
//
// Finite-blocklength rate kernel: inverse Gaussian Q-function, AWGN channel
// dispersion, normal-approximation bit counts and the gradients used when the
// dispersion term is linearized. All rates are in bits (log base 2).

#pragma once

#include <span>
#include <vector>

namespace urllc::fbl {

/// log2(e); the constant `a` of the dispersion formula.
inline constexpr double kLog2E = 1.4426950408889634074;
/// a^2 = (log2 e)^2, the supremum of the per-symbol dispersion.
inline constexpr double kA2 = kLog2E * kLog2E;

/// Floor applied to sqrt(sum of dispersions) in gradient denominators.
inline constexpr double kDispersionSqrtFloor = 1e-12;

struct RatePoint {
    double snr = 0.0;
    double bits_shannon = 0.0;  // log2(1 + snr)
    double dispersion = 0.0;    // a^2 (1 - (1 + snr)^-2)
};

/// Gaussian tail probability Q(x) = P[N(0,1) > x].
double q_func(double x);

/// Inverse of Q on (0, 1). Absolute error below 1e-10.
/// Throws std::domain_error outside the open unit interval.
double q_inv(double eps);

/// Channel dispersion of a complex AWGN symbol at linear SNR `snr` >= 0.
double dispersion(double snr);

RatePoint rate_point(double snr);

/// Normal approximation sum(log2(1+snr_i)) - Qinv(eps) sqrt(sum V_i).
/// Returned unclamped: the value is negative for very short or weak packets.
/// `eps` must lie in (0, 0.5].
double normal_approx_bits(std::span<const double> snrs, double eps);

struct UserBits {
    double capacity_bits = 0.0;   // F_k
    double dispersion_bits = 0.0; // V_k = Qinv(eps) sqrt(sum s V)
    double psi = 0.0;             // F_k - V_k
};

/// Bits delivered to one user over its resource elements.
///
/// With an empty `mask` the powers are the product variables (mask absorbed),
/// otherwise each resource element's log and dispersion terms are weighted by
/// its mask entry in [0, 1]. Sizes of non-empty spans must agree.
UserBits user_bits(std::span<const double> gains, std::span<const double> power,
                   std::span<const double> mask, double eps);

inline UserBits user_bits(std::span<const double> gains, std::span<const double> power,
                          double eps) {
    return user_bits(gains, power, {}, eps);
}

/// Per-element dispersion in the product variable, a^2 (1 - (1 + p g)^-2),
/// together with its first and second derivatives in p.
double vbar_element(double gain, double power);
double vbar_element_d1(double gain, double power);
double vbar_element_d2(double gain, double power);

/// Qinv(eps) sqrt(sum_i vbar_element(g_i, p_i)).
double vbar_user(std::span<const double> gains, std::span<const double> power, double eps);

/// Gradient of vbar_user with respect to the powers. Entry i equals
/// a^2 Qinv(eps) g_i (1 + p_i g_i)^-3 / max(sqrt(sum vbar), floor).
std::vector<double> grad_vbar(std::span<const double> gains, std::span<const double> power,
                              double eps);

}  // namespace urllc::fbl
