// SPDX-License-Identifier: Apache-2.0

#include "urllc/benchmarks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "urllc/fbl.hpp"
#include "urllc/reformulation.hpp"

namespace urllc {

std::string_view scheme_name(SchemeId id) {
    switch (id) {
        case SchemeId::proposed: return "proposed";
        case SchemeId::upper_bound: return "upper_bound";
        case SchemeId::benchmark1: return "benchmark1";
        case SchemeId::benchmark2: return "benchmark2";
        case SchemeId::oracle: return "oracle";
    }
    return "?";
}

SchemeId parse_scheme(std::string_view name) {
    for (auto id : all_schemes()) {
        if (scheme_name(id) == name) return id;
    }
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

std::vector<SchemeId> all_schemes() {
    return {SchemeId::proposed, SchemeId::upper_bound, SchemeId::benchmark1, SchemeId::benchmark2,
            SchemeId::oracle};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

SolveReport solve_upper_bound(const ProblemInstance& inst, const SolverConfig& cfg) {
    auto rep = sca_solve_with_model(inst, cfg, RateModel::shannon);
    rep.scheme = "upper_bound";
    return rep;
}

SolveReport benchmark1_from_upper_bound(const ProblemInstance& inst, const SolveReport& upper,
                                        const SolverConfig& cfg) {
    SolveReport rep = upper;
    rep.scheme = "benchmark1";
    rep.user_bits.clear();
    rep.feasible = false;
    rep.metric = 0.0;
    if (upper.final_alloc.dims() == inst.dims() && upper.final_alloc.is_consistent_binary(1e-9)) {
        const auto audit = check_feasible(inst, upper.final_alloc, cfg.audit_tol);
        rep.user_bits = audit.user_bits;
        rep.feasible = audit.feasible && upper.feasible;
        if (rep.feasible) rep.metric = sum_throughput_metric(inst, upper.final_alloc,
                                                             RateModel::normal_approximation,
                                                             cfg.audit_tol);
    }
    if (!rep.feasible) rep.status = upper.feasible ? "audit_failed" : upper.status;
    return rep;
}

SolveReport solve_benchmark1(const ProblemInstance& inst, const SolverConfig& cfg) {
    return benchmark1_from_upper_bound(inst, solve_upper_bound(inst, cfg), cfg);
}

SolveReport solve_benchmark2(const ProblemInstance& inst, const SolverConfig& cfg) {
    cfg.validate();
    const auto t0 = Clock::now();
    const Dims d = inst.dims();
    const double p0 = inst.p_max() / d.resource_elements();

    SolveReport rep;
    rep.scheme = "benchmark2";
    const auto found =
        solve_assignment(inst, std::vector<double>(d.resource_elements(), p0), cfg);
    rep.newton_steps = found.newton_steps;
    rep.objective_trace = found.objective_trace;
    rep.iterations_used = found.iterations;
    if (!found.ok) {
        rep.status = found.status;
        rep.final_alloc = AllocationState(d);
        rep.wall_time_s = seconds_since(t0);
        return rep;
    }
    rep.relaxation_gap = penalty_terms(found.s.values()).gap();
    // Every element carries p0 whoever owns it.
    Grid3 element_power(d);
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            for (int k = 0; k < d.users; ++k) {
                if (!inst.allowed(k, n)) continue;
                element_power(k, m, n) = p0;
                break;
            }
        }
    }
    const Grid3 assignment =
        binarize(inst, found.s, element_power, RateModel::normal_approximation, cfg);
    rep.final_alloc = AllocationState::from_assignment(assignment, Grid3(d, p0));
    const auto audit = check_feasible(inst, rep.final_alloc, cfg.audit_tol);
    rep.user_bits = audit.user_bits;
    rep.feasible = audit.feasible;
    rep.metric = rep.feasible ? sum_throughput_metric(inst, rep.final_alloc,
                                                      RateModel::normal_approximation,
                                                      cfg.audit_tol)
                              : 0.0;
    rep.status = rep.feasible ? "ok" : "audit_failed";
    rep.wall_time_s = seconds_since(t0);
    return rep;
}

namespace {

struct ActiveElement {
    int user;
    int m;
    int n;
    double gain;
};

/// Euclidean projection onto {f >= 0, sum f <= 1}.
void project_capped_simplex(std::vector<double>& f) {
    for (auto& v : f) v = std::max(v, 0.0);
    double sum = 0.0;
    for (double v : f) sum += v;
    if (sum <= 1.0) return;
    std::vector<double> sorted = f;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cum += sorted[i];
        const double cand = (cum - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - cand > 0.0) theta = cand;
    }
    for (auto& v : f) v = std::max(v - theta, 0.0);
}

class PowerGridSearch {
public:
    PowerGridSearch(const ProblemInstance& inst, std::vector<ActiveElement> active,
                    const OracleOptions& opts)
        : inst_(inst), active_(std::move(active)), opts_(opts) {
        const int k = inst.num_users();
        qinv_.resize(static_cast<std::size_t>(k));
        for (int u = 0; u < k; ++u) {
            const double eps = inst.qos(u).error_prob;
            qinv_[u] = eps >= 0.5 ? 0.0 : fbl::q_inv(eps);
        }
        const auto a = active_.size();
        int g = opts.grid;
        while (g > 2 && std::pow(static_cast<double>(g), static_cast<double>(a)) >
                            static_cast<double>(opts.max_points_per_pass)) {
            --g;
        }
        resolution_ = g;
    }

    /// Best objective over the grid; NaN when no feasible point was found.
    double run(std::vector<double>& best_frac) {
        const std::size_t a = active_.size();
        best_ = -std::numeric_limits<double>::infinity();
        best_frac_.assign(a, 0.0);
        found_ = false;
        std::vector<double> frac(a, 0.0);

        // Coarse pass over the simplex.
        const double step = 1.0 / (resolution_ - 1);
        coarse(frac, 0, 0.0, step);
        double width = step;
        for (int r = 0; r < opts_.refinements && found_; ++r) {
            const std::vector<double> center = best_frac_;
            const double new_step = 2.0 * width / (resolution_ - 1);
            refine(center, frac, 0, width, new_step);
            width = new_step;
        }
        best_frac = best_frac_;
        return found_ ? best_ : NAN;
    }

private:
    void coarse(std::vector<double>& frac, std::size_t i, double used, double step) {
        if (i == frac.size()) {
            evaluate(frac);
            return;
        }
        for (int j = 0; j < resolution_; ++j) {
            const double v = j * step;
            if (used + v > 1.0 + 1e-12) break;
            frac[i] = std::min(v, 1.0 - used);
            coarse(frac, i + 1, used + frac[i], step);
        }
    }

    void refine(const std::vector<double>& center, std::vector<double>& frac, std::size_t i,
                double half_width, double step) {
        if (i == frac.size()) {
            std::vector<double> p = frac;
            project_capped_simplex(p);
            evaluate(p);
            return;
        }
        for (int j = 0; j < resolution_; ++j) {
            frac[i] = std::clamp(center[i] - half_width + j * step, 0.0, 1.0);
            refine(center, frac, i + 1, half_width, step);
        }
    }

    void evaluate(const std::vector<double>& frac) {
        const int k = inst_.num_users();
        cap_.assign(static_cast<std::size_t>(k), 0.0);
        disp_.assign(static_cast<std::size_t>(k), 0.0);
        const double pmax = inst_.p_max();
        for (std::size_t i = 0; i < active_.size(); ++i) {
            const auto rp = fbl::rate_point(frac[i] * pmax * active_[i].gain);
            cap_[active_[i].user] += rp.bits_shannon;
            disp_[active_[i].user] += rp.dispersion;
        }
        double obj = 0.0;
        for (int u = 0; u < k; ++u) {
            const double psi = cap_[u] - qinv_[u] * std::sqrt(disp_[u]);
            if (psi < inst_.qos(u).bits_required) return;
            obj += inst_.qos(u).weight * psi;
        }
        if (obj > best_) {
            best_ = obj;
            best_frac_ = frac;
            found_ = true;
        }
    }

    const ProblemInstance& inst_;
    std::vector<ActiveElement> active_;
    const OracleOptions& opts_;
    std::vector<double> qinv_;
    std::vector<double> cap_, disp_;
    int resolution_ = 2;
    double best_ = 0.0;
    std::vector<double> best_frac_;
    bool found_ = false;
};

}  // namespace

SolveReport oracle_solve(const ProblemInstance& inst, const OracleOptions& opts,
                         double audit_tol) {
    const auto t0 = Clock::now();
    const Dims d = inst.dims();
    const int elements = d.resource_elements();

    // Options per element: unassigned or one of the users allowed in its slot.
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(elements));
    double count = 1.0;
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            auto& c = choices[m * d.slots + n];
            c.push_back(-1);
            for (int k = 0; k < d.users; ++k) {
                if (inst.allowed(k, n)) c.push_back(k);
            }
            count *= static_cast<double>(c.size());
        }
    }
    if (count > static_cast<double>(opts.max_assignments)) {
        throw std::length_error("oracle_solve: " + std::to_string(count) +
                                " assignments exceed the configured cap");
    }

    SolveReport rep;
    rep.scheme = "oracle";
    rep.final_alloc = AllocationState(d);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> pick(static_cast<std::size_t>(elements), 0);
    std::vector<int> best_assign;
    std::vector<double> best_frac;

    while (true) {
        std::vector<ActiveElement> active;
        std::vector<bool> has(static_cast<std::size_t>(d.users), false);
        for (int e = 0; e < elements; ++e) {
            const int k = choices[e][pick[e]];
            if (k < 0) continue;
            active.push_back({k, e / d.slots, e % d.slots, inst.gain(k, e / d.slots)});
            has[k] = true;
        }
        bool viable = true;
        for (int k = 0; k < d.users; ++k) {
            if (!has[k] && inst.qos(k).bits_required > 0.0) viable = false;
        }
        if (viable) {
            PowerGridSearch search(inst, active, opts);
            std::vector<double> frac;
            const double val = search.run(frac);
            if (!std::isnan(val) && val > best) {
                best = val;
                best_assign = pick;
                best_frac = frac;
            }
        }
        // next assignment (mixed-radix counter)
        int e = 0;
        while (e < elements && ++pick[e] == static_cast<int>(choices[e].size())) {
            pick[e] = 0;
            ++e;
        }
        if (e == elements) break;
    }

    if (!best_assign.empty()) {
        Grid3 s(d), p(d);
        std::size_t i = 0;
        for (int e = 0; e < elements; ++e) {
            const int k = choices[e][best_assign[e]];
            if (k < 0) continue;
            s(k, e / d.slots, e % d.slots) = 1.0;
            p(k, e / d.slots, e % d.slots) = best_frac[i++] * inst.p_max();
        }
        rep.final_alloc = AllocationState::from_assignment(s, p);
        const auto audit = check_feasible(inst, rep.final_alloc, audit_tol);
        rep.user_bits = audit.user_bits;
        rep.feasible = audit.feasible;
        rep.metric = rep.feasible ? sum_throughput_metric(inst, rep.final_alloc,
                                                          RateModel::normal_approximation,
                                                          audit_tol)
                                  : 0.0;
        rep.objective_trace.push_back(-best);
    }
    rep.status = rep.feasible ? "ok" : "infeasible";
    rep.iterations_used = 1;
    rep.wall_time_s = seconds_since(t0);
    return rep;
}

SolveReport solve_scheme(SchemeId id, const ProblemInstance& inst, const SolverConfig& cfg) {
    switch (id) {
        case SchemeId::proposed: return sca_solve(inst, cfg);
        case SchemeId::upper_bound: return solve_upper_bound(inst, cfg);
        case SchemeId::benchmark1: return solve_benchmark1(inst, cfg);
        case SchemeId::benchmark2: return solve_benchmark2(inst, cfg);
        case SchemeId::oracle: return oracle_solve(inst);
    }
    throw std::invalid_argument("unknown scheme");
}

}  // namespace urllc
