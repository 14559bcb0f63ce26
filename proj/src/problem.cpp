// SPDX-License-Identifier: Apache-2.0

#include "urllc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "urllc/fbl.hpp"
#include "urllc/units.hpp"

namespace urllc {

ProblemInstance::ProblemInstance(Dims dims, double p_max_dbm, double noise_power_dbm,
                                 std::vector<double> gains, std::vector<QoSProfile> qos,
                                 std::uint64_t seed)
    : dims_(dims),
      p_max_dbm_(p_max_dbm),
      p_max_w_(units::dbm_to_watts(p_max_dbm)),
      noise_power_dbm_(noise_power_dbm),
      noise_power_w_(units::dbm_to_watts(noise_power_dbm)),
      gains_(std::move(gains)),
      qos_(std::move(qos)),
      seed_(seed) {
    if (dims_.users < 1 || dims_.subcarriers < 1 || dims_.slots < 1) {
        throw std::invalid_argument("instance dimensions must be positive");
    }
    if (gains_.size() != static_cast<std::size_t>(dims_.users) * dims_.subcarriers) {
        throw std::invalid_argument("gain matrix must be K x M");
    }
    if (qos_.size() != static_cast<std::size_t>(dims_.users)) {
        throw std::invalid_argument("need one QoS profile per user");
    }
    if (!std::isfinite(p_max_w_) || p_max_w_ <= 0.0) {
        throw std::invalid_argument("P_max must be positive and finite");
    }
    for (double g : gains_) {
        if (!(g > 0.0) || !std::isfinite(g)) {
            throw std::invalid_argument("channel gains must be positive and finite");
        }
    }
    for (const auto& q : qos_) {
        if (q.delay_slots < 1 || q.delay_slots > dims_.slots) {
            throw std::invalid_argument("delay_slots must lie in [1, N]");
        }
        if (!(q.error_prob > 0.0 && q.error_prob <= 0.5)) {
            throw std::invalid_argument("error_prob must lie in (0, 0.5]");
        }
        if (!(q.bits_required >= 0.0) || !std::isfinite(q.bits_required)) {
            throw std::invalid_argument("bits_required must be non-negative");
        }
        if (!(q.weight > 0.0)) throw std::invalid_argument("weights must be positive");
    }
}

std::vector<double> ProblemInstance::user_gains(int k) const {
    std::vector<double> out(static_cast<std::size_t>(dims_.resource_elements()));
    for (int m = 0; m < dims_.subcarriers; ++m) {
        for (int n = 0; n < dims_.slots; ++n) out[m * dims_.slots + n] = gain(k, m);
    }
    return out;
}

ProblemInstance ProblemInstance::with_p_max_dbm(double p_max_dbm) const {
    return ProblemInstance(dims_, p_max_dbm, noise_power_dbm_, gains_, qos_, seed_);
}

ProblemInstance ProblemInstance::with_qos(std::vector<QoSProfile> qos) const {
    return ProblemInstance(dims_, p_max_dbm_, noise_power_dbm_, gains_, std::move(qos), seed_);
}

bool AllocationState::is_binary() const {
    return std::all_of(s.values().begin(), s.values().end(),
                       [](double v) { return v == 0.0 || v == 1.0; });
}

bool AllocationState::is_consistent_binary(double tol) const {
    if (!is_binary()) return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double expect = s.values()[i] * p.values()[i];
        if (std::abs(p_bar.values()[i] - expect) > tol * std::max(1.0, std::abs(expect))) {
            return false;
        }
    }
    return true;
}

AllocationState AllocationState::from_assignment(const Grid3& s, const Grid3& p) {
    if (!(s.dims() == p.dims())) throw std::invalid_argument("assignment/power dims differ");
    AllocationState out(s.dims());
    out.s = s;
    out.p = p;
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.p_bar.values()[i] = s.values()[i] * p.values()[i];
    }
    return out;
}

double path_loss_db(double distance_m) { return 35.3 + 37.6 * std::log10(distance_m); }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    auto splitmix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return splitmix(splitmix(a) ^ (b + 0x632be59bd9b4e019ULL));
}

ProblemInstance generate_instance(const ChannelGenSpec& spec, Dims dims, double p_max_dbm,
                                  const std::vector<QoSProfile>& qos) {
    if (!(spec.cell_radius_m > 0.0) || !(spec.subcarrier_bandwidth_hz > 0.0)) {
        throw std::invalid_argument("cell radius and bandwidth must be positive");
    }
    if (!spec.user_distances_m.empty() &&
        spec.user_distances_m.size() < static_cast<std::size_t>(dims.users)) {
        throw std::invalid_argument("user_distances_m shorter than the user count");
    }
    const double noise_dbm =
        units::noise_power_dbm(spec.noise_density_dbm_hz, spec.subcarrier_bandwidth_hz);
    const double noise_w = units::dbm_to_watts(noise_dbm);

    std::vector<double> gains(static_cast<std::size_t>(dims.users) * dims.subcarriers);
    for (int k = 0; k < dims.users; ++k) {
        const double d =
            spec.user_distances_m.empty() ? spec.cell_radius_m : spec.user_distances_m[k];
        if (!(d > 0.0 && d <= spec.cell_radius_m)) {
            throw std::invalid_argument("user distance must lie in (0, cell_radius]");
        }
        const double large_scale = units::db_to_linear(-path_loss_db(d));
        std::uint64_t state = mix_seed(spec.rng_seed, static_cast<std::uint64_t>(k));
        for (int m = 0; m < dims.subcarriers; ++m) {
            state = mix_seed(state, static_cast<std::uint64_t>(m));
            // 53-bit uniform on [0, 1), then inverse CDF of Exp(1).
            const double u = static_cast<double>(state >> 11) * 0x1.0p-53;
            const double fading = -std::log1p(-u);
            gains[static_cast<std::size_t>(k) * dims.subcarriers + m] =
                large_scale * fading / noise_w;
        }
    }
    return ProblemInstance(dims, p_max_dbm, noise_dbm, std::move(gains), qos, spec.rng_seed);
}

std::vector<double> user_bit_counts(const ProblemInstance& inst, const AllocationState& alloc,
                                    RateModel model) {
    const Dims d = inst.dims();
    std::vector<double> out(static_cast<std::size_t>(d.users));
    for (int k = 0; k < d.users; ++k) {
        const auto gains = inst.user_gains(k);
        const double eps =
            model == RateModel::shannon ? 0.5 : inst.qos(k).error_prob;
        out[k] = fbl::user_bits(gains, alloc.p.user(k), alloc.s.user(k), eps).psi;
    }
    return out;
}

FeasibilityReport check_feasible(const ProblemInstance& inst, const AllocationState& alloc,
                                 double tol, RateModel model) {
    const Dims d = inst.dims();
    if (!(alloc.dims() == d)) throw std::invalid_argument("allocation dims differ from instance");
    if (!alloc.is_binary()) {
        throw std::invalid_argument("check_feasible expects a binary assignment");
    }
    if (!alloc.is_consistent_binary(1e-9)) {
        throw std::invalid_argument("check_feasible expects p_bar == s * p");
    }
    FeasibilityReport rep;
    rep.c4_binary = true;

    rep.c2_slack = *std::min_element(alloc.p.values().begin(), alloc.p.values().end());
    if (rep.c2_slack < 0.0) rep.violated.emplace_back("C2");

    // The rate formulas need p >= 0; with a C2 violation C1 is reported as failed.
    if (rep.c2_slack >= 0.0) {
        rep.user_bits = user_bit_counts(inst, alloc, model);
        rep.c1_slack = std::numeric_limits<double>::infinity();
        bool c1_ok = true;
        for (int k = 0; k < d.users; ++k) {
            const double b = inst.qos(k).bits_required;
            rep.c1_slack = std::min(rep.c1_slack, rep.user_bits[k] - b);
            if (rep.user_bits[k] < b - tol * std::max(1.0, b)) c1_ok = false;
        }
        if (!c1_ok) rep.violated.emplace_back("C1");
    } else {
        rep.c1_slack = -std::numeric_limits<double>::infinity();
        rep.violated.emplace_back("C1");
    }

    double used = 0.0;
    for (std::size_t i = 0; i < alloc.s.size(); ++i) {
        used += alloc.s.values()[i] * alloc.p.values()[i];
    }
    rep.c3_slack = inst.p_max() - used;
    if (used > inst.p_max() * (1.0 + tol)) rep.violated.emplace_back("C3");

    double worst_load = 0.0;
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            double load = 0.0;
            for (int k = 0; k < d.users; ++k) load += alloc.s(k, m, n);
            worst_load = std::max(worst_load, load);
        }
    }
    rep.c5_slack = 1.0 - worst_load;
    if (worst_load > 1.0) rep.violated.emplace_back("C5");

    for (int k = 0; k < d.users; ++k) {
        for (int m = 0; m < d.subcarriers; ++m) {
            for (int n = 0; n < d.slots; ++n) {
                if (!inst.allowed(k, n)) {
                    rep.c6_violation = std::max(rep.c6_violation, alloc.s(k, m, n));
                }
            }
        }
    }
    if (rep.c6_violation > 0.0) rep.violated.emplace_back("C6");

    rep.feasible = rep.violated.empty();
    return rep;
}

double sum_throughput_metric(const ProblemInstance& inst, const AllocationState& alloc,
                             RateModel model, double tol) {
    if (!(alloc.dims() == inst.dims()) || !alloc.is_consistent_binary(1e-9)) return 0.0;
    const auto rep = check_feasible(inst, alloc, tol, model);
    if (!rep.feasible) return 0.0;
    double total = 0.0;
    for (double b : rep.user_bits) total += std::max(b, 0.0);
    return total / inst.dims().resource_elements();
}

double default_penalty(const ProblemInstance& inst) {
    return 10.0 * std::log2(1.0 + inst.p_max() / inst.noise_power());
}

}  // namespace urllc
