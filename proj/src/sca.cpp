// SPDX-License-Identifier: Apache-2.0

#include "urllc/sca.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "urllc/fbl.hpp"
#include "urllc/reformulation.hpp"

namespace urllc {

void SolverConfig::validate() const {
    if (j_max < 1) throw std::invalid_argument("j_max must be at least 1");
    if (beta && !(*beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(round_threshold > 0.0 && round_threshold < 1.0)) {
        throw std::invalid_argument("round_threshold must lie in (0, 1)");
    }
}

AllocationState initialize(const ProblemInstance& inst, const SolverConfig& cfg) {
    (void)cfg;  // single policy today
    const Dims d = inst.dims();
    AllocationState st(d);
    double mass = 0.0;
    for (int n = 0; n < d.slots; ++n) {
        int allowed = 0;
        for (int k = 0; k < d.users; ++k) allowed += inst.allowed(k, n) ? 1 : 0;
        if (allowed == 0) continue;
        for (int m = 0; m < d.subcarriers; ++m) {
            for (int k = 0; k < d.users; ++k) {
                if (inst.allowed(k, n)) st.s(k, m, n) = 1.0 / allowed;
            }
            mass += 1.0;
        }
    }
    const double per_element = inst.p_max() / mass;
    for (int k = 0; k < d.users; ++k) {
        for (int m = 0; m < d.subcarriers; ++m) {
            for (int n = 0; n < d.slots; ++n) {
                if (!inst.allowed(k, n)) continue;
                st.p(k, m, n) = per_element;
                st.p_bar(k, m, n) = st.s(k, m, n) * per_element;
            }
        }
    }
    return st;
}

Grid3 round_assignment(const ProblemInstance& inst, const Grid3& s, double threshold) {
    const Dims d = inst.dims();
    Grid3 out(d);
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            int best = -1;
            double best_val = threshold;
            for (int k = 0; k < d.users; ++k) {
                if (!inst.allowed(k, n)) continue;
                if (s(k, m, n) > best_val) {
                    best_val = s(k, m, n);
                    best = k;
                }
            }
            if (best >= 0) out(best, m, n) = 1.0;
        }
    }
    return out;
}

namespace {

struct UserSums {
    double capacity = 0.0;
    double dispersion = 0.0;
};

double bits_of(const UserSums& u, double qinv) {
    return u.capacity - qinv * std::sqrt(std::max(u.dispersion, 0.0));
}

}  // namespace

Grid3 extract_assignment(const ProblemInstance& inst, const Grid3& s, const Grid3& power,
                         RateModel model) {
    const Dims d = inst.dims();
    Grid3 out(d);
    std::vector<int> owner(static_cast<std::size_t>(d.resource_elements()), -1);
    std::vector<double> re_power(owner.size(), 0.0);
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            int best = -1;
            double best_val = 0.0;
            double total = 0.0;
            for (int k = 0; k < d.users; ++k) {
                if (!inst.allowed(k, n)) continue;
                total += power(k, m, n);
                if (s(k, m, n) > best_val) {
                    best_val = s(k, m, n);
                    best = k;
                }
            }
            owner[m * d.slots + n] = best;
            re_power[m * d.slots + n] = total;
        }
    }

    std::vector<double> qinv(static_cast<std::size_t>(d.users), 0.0);
    std::vector<UserSums> sums(qinv.size());
    auto point = [&](int k, int re) {
        return fbl::rate_point(re_power[re] * inst.gain(k, re / d.slots));
    };
    for (int k = 0; k < d.users; ++k) {
        const double eps = model == RateModel::shannon ? 0.5 : inst.qos(k).error_prob;
        qinv[k] = eps >= 0.5 ? 0.0 : fbl::q_inv(eps);
    }
    for (int re = 0; re < static_cast<int>(owner.size()); ++re) {
        if (owner[re] < 0) continue;
        const auto rp = point(owner[re], re);
        sums[owner[re]].capacity += rp.bits_shannon;
        sums[owner[re]].dispersion += rp.dispersion;
    }
    auto short_of = [&](int k) {
        return inst.qos(k).bits_required - bits_of(sums[k], qinv[k]);
    };

    // Each pass moves one element to the user furthest below its target,
    // never pushing a satisfied donor below its own target.
    const int max_moves = d.resource_elements() * d.users;
    for (int move = 0; move < max_moves; ++move) {
        int needy = -1;
        double worst = 0.0;
        for (int k = 0; k < d.users; ++k) {
            const double gap = short_of(k) / std::max(inst.qos(k).bits_required, 1.0);
            if (gap > worst) {
                worst = gap;
                needy = k;
            }
        }
        if (needy < 0) break;

        int pick = -1;
        double pick_gain = 0.0;
        for (int re = 0; re < static_cast<int>(owner.size()); ++re) {
            const int from = owner[re];
            if (from == needy || !inst.allowed(needy, re % d.slots)) continue;
            if (from >= 0) {
                const auto lost = point(from, re);
                UserSums after = sums[from];
                after.capacity -= lost.bits_shannon;
                after.dispersion -= lost.dispersion;
                if (bits_of(after, qinv[from]) < inst.qos(from).bits_required) continue;
            }
            const auto won = point(needy, re);
            UserSums after = sums[needy];
            after.capacity += won.bits_shannon;
            after.dispersion += won.dispersion;
            const double gain = bits_of(after, qinv[needy]) - bits_of(sums[needy], qinv[needy]);
            if (gain > pick_gain) {
                pick_gain = gain;
                pick = re;
            }
        }
        if (pick < 0) break;
        if (owner[pick] >= 0) {
            const auto lost = point(owner[pick], pick);
            sums[owner[pick]].capacity -= lost.bits_shannon;
            sums[owner[pick]].dispersion -= lost.dispersion;
        }
        const auto won = point(needy, pick);
        sums[needy].capacity += won.bits_shannon;
        sums[needy].dispersion += won.dispersion;
        owner[pick] = needy;
    }

    // Single-element moves that raise the total without breaking a target.
    for (int move = 0; move < max_moves; ++move) {
        int pick = -1, pick_to = -1;
        double pick_gain = 1e-9;
        for (int re = 0; re < static_cast<int>(owner.size()); ++re) {
            const int from = owner[re];
            if (from < 0) continue;
            const auto lost = point(from, re);
            UserSums left = sums[from];
            left.capacity -= lost.bits_shannon;
            left.dispersion -= lost.dispersion;
            const double from_after = bits_of(left, qinv[from]);
            if (from_after < inst.qos(from).bits_required) continue;
            const double from_delta = from_after - bits_of(sums[from], qinv[from]);
            for (int to = 0; to < d.users; ++to) {
                if (to == from || !inst.allowed(to, re % d.slots)) continue;
                const auto won = point(to, re);
                UserSums got = sums[to];
                got.capacity += won.bits_shannon;
                got.dispersion += won.dispersion;
                const double gain = from_delta + bits_of(got, qinv[to]) - bits_of(sums[to], qinv[to]);
                if (gain > pick_gain) {
                    pick_gain = gain;
                    pick = re;
                    pick_to = to;
                }
            }
        }
        if (pick < 0) break;
        const auto lost = point(owner[pick], pick);
        sums[owner[pick]].capacity -= lost.bits_shannon;
        sums[owner[pick]].dispersion -= lost.dispersion;
        const auto won = point(pick_to, pick);
        sums[pick_to].capacity += won.bits_shannon;
        sums[pick_to].dispersion += won.dispersion;
        owner[pick] = pick_to;
    }

    for (int re = 0; re < static_cast<int>(owner.size()); ++re) {
        if (owner[re] >= 0) out(owner[re], re / d.slots, re % d.slots) = 1.0;
    }
    return out;
}

Grid3 binarize(const ProblemInstance& inst, const Grid3& s, const Grid3& power, RateModel model,
               const SolverConfig& cfg) {
    if (cfg.rounding == RoundingRule::threshold) {
        return round_assignment(inst, s, cfg.round_threshold);
    }
    return extract_assignment(inst, s, power, model);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool usable(const InnerSolution& sol) {
    return sol.status == InnerStatus::optimal ||
           (sol.status == InnerStatus::max_iterations && sol.max_violation <= 1e-8);
}

double exact_power_objective(const ProblemInstance& inst, const Grid3& p_bar, RateModel model) {
    Grid3 zeros(inst.dims());
    return exact_penalized_objective(inst, p_bar, zeros, 0.0, model);
}

}  // namespace

RestoreResult restore_power(const ProblemInstance& inst, const Grid3& assignment,
                            const Grid3& expansion, RateModel model, const SolverConfig& cfg) {
    const Dims d = inst.dims();
    RestoreResult res;
    res.p_bar = Grid3(d);

    // Linearization point restricted to the assignment, with an equal-split
    // fallback for elements the relaxed solution left (numerically) empty.
    int assigned = 0;
    for (double v : assignment.values()) assigned += v == 1.0 ? 1 : 0;
    if (assigned == 0) {
        bool need_bits = false;
        for (const auto& q : inst.qos()) need_bits = need_bits || q.bits_required > 0.0;
        res.feasible = !need_bits;
        return res;
    }
    const double equal_share = inst.p_max() / assigned;
    Grid3 point(d);
    Grid3 equal(d);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment.values()[i] != 1.0) continue;
        point.values()[i] = std::max(expansion.values()[i], 1e-9 * equal_share);
        equal.values()[i] = equal_share;
    }

    double prev = NAN;
    bool have = false;
    for (int j = 1; j <= cfg.j_max; ++j) {
        auto sub = build_power_subproblem(inst, assignment, point, model);
        AllocationState tmp(d);
        tmp.p_bar = point;
        auto x0 = to_variables(sub, tmp);
        auto sol = solve(sub, cfg.inner, x0);
        res.newton_steps += sol.newton_steps;
        if (!usable(sol) && j == 1) {
            sub = build_power_subproblem(inst, assignment, equal, model);
            tmp.p_bar = equal;
            x0 = to_variables(sub, tmp);
            sol = solve(sub, cfg.inner, x0);
            res.newton_steps += sol.newton_steps;
        }
        if (!usable(sol)) break;
        AllocationState next(d);
        scatter_variables(sub, sol.point, next);
        point = next.p_bar;
        have = true;
        const double obj = exact_power_objective(inst, point, model);
        if (j > 1 && std::abs(obj - prev) <= cfg.rel_obj_tol * std::max(1.0, std::abs(prev))) break;
        prev = obj;
    }
    res.feasible = have;
    if (have) res.p_bar = point;
    return res;
}

AssignmentSolve solve_assignment(const ProblemInstance& inst,
                                 const std::vector<double>& element_power,
                                 const SolverConfig& cfg, RateModel model) {
    const double beta = cfg.beta.value_or(default_penalty(inst));
    const Dims d = inst.dims();
    AssignmentSolve out;
    out.s = initialize(inst, cfg).s;
    double prev = NAN;
    for (int j = 1; j <= cfg.j_max; ++j) {
        const auto sub = build_assignment_subproblem(inst, out.s, element_power, beta, model);
        AllocationState tmp(d);
        tmp.s = out.s;
        const auto sol = solve(sub, cfg.inner, to_variables(sub, tmp));
        out.newton_steps += sol.newton_steps;
        if (!usable(sol)) {
            if (j == 1) {
                out.status = sol.status == InnerStatus::infeasible ? "subproblem_infeasible"
                                                                   : "subproblem_failed";
                return out;
            }
            break;
        }
        scatter_variables(sub, sol.point, tmp);
        const double obj = exact_assignment_objective(inst, tmp.s, element_power, beta, model);
        if (j > 1 && obj > prev) break;
        out.s = tmp.s;
        out.objective_trace.push_back(obj);
        out.iterations = j;
        if (j > 1 && std::abs(obj - prev) <= cfg.rel_obj_tol * std::max(1.0, std::abs(prev))) break;
        prev = obj;
    }
    out.ok = true;
    out.status = "ok";
    return out;
}

SolveReport sca_solve_with_model(const ProblemInstance& inst, const SolverConfig& cfg,
                                 RateModel model) {
    cfg.validate();
    const auto t0 = Clock::now();
    const Dims d = inst.dims();
    SolveReport rep;
    rep.scheme = model == RateModel::shannon ? "upper_bound" : "proposed";
    rep.final_alloc = AllocationState(d);
    const ReformulationOptions opts{cfg.beta.value_or(default_penalty(inst)), model};

    AllocationState state = initialize(inst, cfg);
    double prev = NAN;
    for (int j = 1; j <= cfg.j_max; ++j) {
        const auto sub = build_subproblem(inst, state, opts);
        const auto x0 = to_variables(sub, state);
        const auto sol = solve(sub, cfg.inner, x0);
        rep.newton_steps += sol.newton_steps;
        if (!usable(sol)) {
            if (j == 1) {
                rep.status = sol.status == InnerStatus::infeasible ? "subproblem_infeasible"
                                                                   : "subproblem_failed";
                rep.wall_time_s = seconds_since(t0);
                return rep;
            }
            break;
        }
        AllocationState next = state;
        scatter_variables(sub, sol.point, next);
        const double obj = exact_penalized_objective(inst, next.p_bar, next.s, opts.beta, model);
        // The previous iterate is feasible for this surrogate, so an increase
        // can only come from the inexact inner solve: keep the old point.
        if (j > 1 && obj > prev) break;
        state = std::move(next);
        rep.objective_trace.push_back(obj);
        rep.iterations_used = j;
        if (j > 1 && std::abs(obj - prev) <= cfg.rel_obj_tol * std::max(1.0, std::abs(prev))) break;
        prev = obj;
    }
    rep.relaxation_gap = penalty_terms(state.s.values()).gap();

    // Power each element carries in the relaxed solution, whoever holds it.
    // Only its shape matters for the assignment, so the whole budget is spent.
    std::vector<double> profile(static_cast<std::size_t>(d.resource_elements()), 0.0);
    for (int k = 0; k < d.users; ++k) {
        for (int m = 0; m < d.subcarriers; ++m) {
            for (int n = 0; n < d.slots; ++n) profile[m * d.slots + n] += state.p_bar(k, m, n);
        }
    }
    double spent = 0.0;
    for (double v : profile) spent += v;
    if (spent > 0.0) {
        for (auto& v : profile) v *= inst.p_max() / spent;
    }

    std::vector<Grid3> candidates;
    if (cfg.rounding == RoundingRule::argmax_repair) {
        const auto found = solve_assignment(inst, profile, cfg, model);
        rep.newton_steps += found.newton_steps;
        if (found.ok) candidates.push_back(extract_assignment(inst, found.s, state.p_bar, model));
    }
    candidates.push_back(binarize(inst, state.s, state.p_bar, model, cfg));

    // Each candidate is re-extracted once at the powers restoration gave it.
    std::vector<bool> refined(candidates.size(), false);
    bool have = false;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const Grid3 assignment = candidates[c];
        Grid3 owner_power(d);
        for (int k = 0; k < d.users; ++k) {
            for (int m = 0; m < d.subcarriers; ++m) {
                for (int n = 0; n < d.slots; ++n) {
                    if (assignment(k, m, n) == 1.0) {
                        owner_power(k, m, n) = profile[m * d.slots + n];
                    }
                }
            }
        }
        Grid3 power(d);
        std::string status;
        if (cfg.restore) {
            const auto restored = restore_power(inst, assignment, owner_power, model, cfg);
            rep.newton_steps += restored.newton_steps;
            if (restored.feasible) power = restored.p_bar;
            else status = "restoration_infeasible";
        } else {
            power = owner_power;
        }
        if (cfg.rounding == RoundingRule::argmax_repair && !refined[c]) {
            auto next = extract_assignment(inst, assignment, status.empty() ? power : owner_power, model);
            if (next != assignment) {
                candidates.push_back(std::move(next));
                refined.push_back(true);
            }
        }
        const auto alloc = AllocationState::from_assignment(assignment, power);
        FeasibilityReport audit;
        if (status.empty()) {
            audit = check_feasible(inst, alloc, cfg.audit_tol, model);
            status = audit.feasible ? "ok" : "audit_failed";
        }
        const bool feasible = status == "ok";
        const double metric =
            feasible ? sum_throughput_metric(inst, alloc, model, cfg.audit_tol) : 0.0;
        if (!have || (feasible && (!rep.feasible || metric > rep.metric))) {
            rep.final_alloc = alloc;
            rep.user_bits = audit.user_bits;
            rep.feasible = feasible;
            rep.metric = metric;
            rep.status = status;
            have = true;
        }
    }
    rep.wall_time_s = seconds_since(t0);
    return rep;
}

SolveReport sca_solve(const ProblemInstance& inst, const SolverConfig& cfg) {
    return sca_solve_with_model(inst, cfg, RateModel::normal_approximation);
}

}  // namespace urllc
