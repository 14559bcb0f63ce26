// SPDX-License-Identifier: Apache-2.0
//
// Problem instances for downlink URLLC-OFDMA resource allocation, random
// channel generation, the original-constraint feasibility audit and the
// sum-throughput metric.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "urllc/grid.hpp"

namespace urllc {

/// Per-user QoS: a packet of `bits_required` bits delivered with error
/// probability at most `error_prob` within the first `delay_slots` slots.
struct QoSProfile {
    double bits_required = 160.0;
    double error_prob = 1e-6;
    int delay_slots = 1;
    double weight = 1.0;

    bool operator==(const QoSProfile&) const = default;
};

/// Which bit-count formula scores an allocation.
enum class RateModel {
    normal_approximation,  // F_k - V_k
    shannon,               // F_k only (dispersion dropped)
};

/// Immutable problem data. Gains are normalized, g = |h|^2 / sigma^2 in 1/W,
/// and constant over the slots of the frame.
class ProblemInstance {
public:
    ProblemInstance(Dims dims, double p_max_dbm, double noise_power_dbm,
                    std::vector<double> gains, std::vector<QoSProfile> qos,
                    std::uint64_t seed = 0);

    Dims dims() const { return dims_; }
    int num_users() const { return dims_.users; }
    int num_subcarriers() const { return dims_.subcarriers; }
    int num_slots() const { return dims_.slots; }

    double p_max_dbm() const { return p_max_dbm_; }
    double p_max() const { return p_max_w_; }
    double noise_power_dbm() const { return noise_power_dbm_; }
    double noise_power() const { return noise_power_w_; }
    std::uint64_t seed() const { return seed_; }

    double gain(int k, int m) const {
        return gains_[static_cast<std::size_t>(k) * dims_.subcarriers + m];
    }
    /// K x M row-major.
    const std::vector<double>& gains() const { return gains_; }
    const std::vector<QoSProfile>& qos() const { return qos_; }
    const QoSProfile& qos(int k) const { return qos_[k]; }

    /// C6 support: user k may use slot n (0-based) iff n < D_k.
    bool allowed(int k, int n) const { return n < qos_[k].delay_slots; }

    /// Per-resource-element gains of user k, M*N entries laid out like Grid3::user.
    std::vector<double> user_gains(int k) const;

    /// Copy with a different power budget.
    ProblemInstance with_p_max_dbm(double p_max_dbm) const;
    /// Copy with different QoS profiles (same user count).
    ProblemInstance with_qos(std::vector<QoSProfile> qos) const;

    bool operator==(const ProblemInstance& o) const {
        return dims_ == o.dims_ && p_max_dbm_ == o.p_max_dbm_ &&
               noise_power_dbm_ == o.noise_power_dbm_ && gains_ == o.gains_ &&
               qos_ == o.qos_ && seed_ == o.seed_;
    }

private:
    Dims dims_;
    double p_max_dbm_;
    double p_max_w_;
    double noise_power_dbm_;
    double noise_power_w_;
    std::vector<double> gains_;
    std::vector<QoSProfile> qos_;
    std::uint64_t seed_;
};

/// Candidate solution over the K x M x N resource elements: powers p,
/// assignment s (relaxed to [0,1] inside the solver) and the product p_bar.
struct AllocationState {
    Grid3 p;
    Grid3 s;
    Grid3 p_bar;

    AllocationState() = default;
    explicit AllocationState(Dims dims) : p(dims), s(dims), p_bar(dims) {}

    Dims dims() const { return s.dims(); }
    bool is_binary() const;
    /// Binary and p_bar == s * p elementwise (within `tol` relative).
    bool is_consistent_binary(double tol = 1e-12) const;

    /// Build a binary state from an assignment and powers on assigned REs.
    static AllocationState from_assignment(const Grid3& s, const Grid3& p);
};

struct ChannelGenSpec {
    double cell_radius_m = 250.0;
    /// Per-user distance; empty places every user at the cell edge.
    std::vector<double> user_distances_m;
    double noise_density_dbm_hz = -174.0;
    double subcarrier_bandwidth_hz = 15e3;
    std::uint64_t rng_seed = 1;
};

/// Path loss in dB at distance d (meters): 35.3 + 37.6 log10(d).
double path_loss_db(double distance_m);

/// Random instance: per-subcarrier power gain = path loss x unit-mean
/// exponential (Rayleigh amplitude), divided by the subcarrier noise power.
/// Each user draws from its own stream derived from (rng_seed, k), so user k's
/// channel does not depend on how many users the instance has.
ProblemInstance generate_instance(const ChannelGenSpec& spec, Dims dims, double p_max_dbm,
                                  const std::vector<QoSProfile>& qos);

/// Deterministic 64-bit mixing (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

struct FeasibilityReport {
    bool feasible = false;
    // Worst slack of each constraint family (>= 0 means satisfied).
    double c1_slack = 0.0;  // min_k Psi_k - B_k
    double c2_slack = 0.0;  // min p
    double c3_slack = 0.0;  // P_max - sum s p
    bool c4_binary = false;
    double c5_slack = 0.0;  // 1 - max_{m,n} sum_k s
    double c6_violation = 0.0;  // max s over forbidden slots
    std::vector<double> user_bits;  // Psi_k under the chosen rate model
    std::vector<std::string> violated;
};

/// Audit a binary allocation against the original constraints C1-C6.
/// C1 and C3 use relative tolerance `tol`; C4-C6 are exact.
/// Throws std::invalid_argument for non-binary or inconsistent states.
FeasibilityReport check_feasible(const ProblemInstance& inst, const AllocationState& alloc,
                                 double tol = 1e-6,
                                 RateModel model = RateModel::normal_approximation);

/// Psi_k for every user under `model` (using s as the mask and p as power).
std::vector<double> user_bit_counts(const ProblemInstance& inst, const AllocationState& alloc,
                                    RateModel model = RateModel::normal_approximation);

/// (1/MN) sum_k max(Psi_k, 0) when the allocation passes check_feasible,
/// exactly 0 otherwise (including non-binary allocations).
double sum_throughput_metric(const ProblemInstance& inst, const AllocationState& alloc,
                             RateModel model = RateModel::normal_approximation,
                             double tol = 1e-6);

/// Default penalty factor 10 log2(1 + P_max / sigma^2).
double default_penalty(const ProblemInstance& inst);

}  // namespace urllc
