// SPDX-License-Identifier: Apache-2.0

#include "urllc/fbl.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace urllc::fbl {
namespace {

// Acklam's rational approximation of the standard normal quantile,
// relative error about 1.15e-9 before refinement.
double normal_quantile_guess(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double q_func(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inv(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::domain_error("q_inv: probability must lie in (0, 1), got " +
                                std::to_string(eps));
    }
    if (eps == 0.5) return 0.0;
    // Work on the upper tail and mirror, so Q(x) - eps is evaluated where
    // erfc keeps full relative precision.
    const bool upper = eps < 0.5;
    const double tail = upper ? eps : 1.0 - eps;
    // Q^{-1}(tail) = Phi^{-1}(1 - tail) = -Phi^{-1}(tail).
    double x = -normal_quantile_guess(tail);
    for (int i = 0; i < 2; ++i) {
        // Newton on Q(x) - tail; dQ/dx = -phi(x).
        x += (q_func(x) - tail) / normal_pdf(x);
    }
    return upper ? x : -x;
}

double dispersion(double snr) {
    if (!(snr >= 0.0)) {
        throw std::domain_error("dispersion: SNR must be non-negative");
    }
    const double inv = 1.0 / (1.0 + snr);
    // 1 - inv^2 = (1 - inv)(1 + inv), with 1 - inv = snr / (1 + snr) exact-ish
    return kA2 * (snr * inv) * (1.0 + inv);
}

RatePoint rate_point(double snr) {
    return RatePoint{snr, std::log2(1.0 + snr), dispersion(snr)};
}

namespace {

void check_eps(double eps) {
    if (!(eps > 0.0 && eps <= 0.5)) {
        throw std::domain_error("error probability must lie in (0, 0.5]");
    }
}

}  // namespace

double normal_approx_bits(std::span<const double> snrs, double eps) {
    check_eps(eps);
    if (snrs.empty()) return 0.0;
    double cap = 0.0;
    double disp = 0.0;
    for (double g : snrs) {
        cap += std::log2(1.0 + g);
        disp += dispersion(g);
    }
    return cap - q_inv(eps) * std::sqrt(disp);
}

UserBits user_bits(std::span<const double> gains, std::span<const double> power,
                   std::span<const double> mask, double eps) {
    check_eps(eps);
    if (gains.size() != power.size() || (!mask.empty() && mask.size() != gains.size())) {
        throw std::invalid_argument("user_bits: gain/power/mask sizes differ");
    }
    double cap = 0.0;
    double disp = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        const double w = mask.empty() ? 1.0 : mask[i];
        if (power[i] < 0.0 || w < 0.0 || w > 1.0) {
            throw std::invalid_argument("user_bits: negative power or mask outside [0,1]");
        }
        const double snr = power[i] * gains[i];
        cap += w * std::log2(1.0 + snr);
        disp += w * dispersion(snr);
    }
    UserBits out;
    out.capacity_bits = cap;
    out.dispersion_bits = q_inv(eps) * std::sqrt(disp);
    out.psi = cap - out.dispersion_bits;
    return out;
}

double vbar_element(double gain, double power) { return dispersion(gain * power); }

double vbar_element_d1(double gain, double power) {
    const double u = 1.0 + power * gain;
    return 2.0 * kA2 * gain / (u * u * u);
}

double vbar_element_d2(double gain, double power) {
    const double u = 1.0 + power * gain;
    const double u2 = u * u;
    return -6.0 * kA2 * gain * gain / (u2 * u2);
}

double vbar_user(std::span<const double> gains, std::span<const double> power, double eps) {
    check_eps(eps);
    if (gains.size() != power.size()) {
        throw std::invalid_argument("vbar_user: gain/power sizes differ");
    }
    double disp = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) disp += vbar_element(gains[i], power[i]);
    return q_inv(eps) * std::sqrt(disp);
}

std::vector<double> grad_vbar(std::span<const double> gains, std::span<const double> power,
                              double eps) {
    check_eps(eps);
    if (gains.size() != power.size()) {
        throw std::invalid_argument("grad_vbar: gain/power sizes differ");
    }
    double disp = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) disp += vbar_element(gains[i], power[i]);
    const double scale = kA2 * q_inv(eps) / std::max(std::sqrt(disp), kDispersionSqrtFloor);
    std::vector<double> grad(gains.size());
    for (std::size_t i = 0; i < gains.size(); ++i) {
        const double u = 1.0 + power[i] * gains[i];
        grad[i] = scale * gains[i] / (u * u * u);
    }
    return grad;
}

}  // namespace urllc::fbl
