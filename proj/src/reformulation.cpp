// SPDX-License-Identifier: Apache-2.0

#include "urllc/reformulation.hpp"

#include <cmath>
#include <stdexcept>

#include "urllc/fbl.hpp"

namespace urllc {

PenaltyTerms penalty_terms(std::span<const double> s) {
    PenaltyTerms out;
    for (double v : s) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("penalty_terms: entries must lie in [0, 1]");
        }
        out.w += v;
        out.e += v * v;
    }
    return out;
}

double AffineE::operator()(std::span<const double> s) const {
    if (s.size() != slope.size()) throw std::invalid_argument("AffineE: size mismatch");
    double v = offset;
    for (std::size_t i = 0; i < s.size(); ++i) v += slope[i] * s[i];
    return v;
}

AffineE linearize_E(std::span<const double> s_ref) {
    // E(r) + sum 2 r (s - r) = sum 2 r s - sum r^2
    AffineE out;
    out.slope.resize(s_ref.size());
    for (std::size_t i = 0; i < s_ref.size(); ++i) {
        out.slope[i] = 2.0 * s_ref[i];
        out.offset -= s_ref[i] * s_ref[i];
    }
    return out;
}

namespace {

double eps_for(const ProblemInstance& inst, int k, RateModel model) {
    return model == RateModel::shannon ? 0.5 : inst.qos(k).error_prob;
}

/// Group id per resource element (m, n), or -1 when no user may use it.
std::vector<int> element_groups(const ProblemInstance& inst, int& num_groups) {
    const Dims d = inst.dims();
    std::vector<int> ids(static_cast<std::size_t>(d.resource_elements()), -1);
    num_groups = 0;
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            for (int k = 0; k < d.users; ++k) {
                if (inst.allowed(k, n)) {
                    ids[m * d.slots + n] = num_groups++;
                    break;
                }
            }
        }
    }
    return ids;
}

/// Linearized dispersion term of one user around the expansion powers:
/// value at the expansion and the gradient (per element of the user's M*N).
struct VbarLinearization {
    double value = 0.0;
    std::vector<double> grad;
};

VbarLinearization linearize_vbar(const ProblemInstance& inst, int k, std::span<const double> p_bar,
                                 RateModel model) {
    VbarLinearization out;
    const auto gains = inst.user_gains(k);
    const double eps = eps_for(inst, k, model);
    if (eps == 0.5) {
        out.grad.assign(gains.size(), 0.0);
        return out;
    }
    out.value = fbl::vbar_user(gains, p_bar, eps);
    out.grad = fbl::grad_vbar(gains, p_bar, eps);
    return out;
}

}  // namespace

ConvexSubproblem build_subproblem(const ProblemInstance& inst, const AllocationState& expansion,
                                  const ReformulationOptions& opts) {
    const Dims d = inst.dims();
    if (!(expansion.dims() == d)) throw std::invalid_argument("expansion dims differ from instance");
    const double pmax = inst.p_max();

    for (int k = 0; k < d.users; ++k) {
        for (int m = 0; m < d.subcarriers; ++m) {
            for (int n = 0; n < d.slots; ++n) {
                const double pb = expansion.p_bar(k, m, n);
                const double sv = expansion.s(k, m, n);
                if (inst.allowed(k, n)) {
                    if (!(pb > 0.0)) {
                        throw std::invalid_argument(
                            "build_subproblem: expansion p_bar must be positive on allowed elements");
                    }
                    if (!(sv >= 0.0 && sv <= 1.0)) {
                        throw std::invalid_argument("build_subproblem: expansion s outside [0, 1]");
                    }
                } else if (pb != 0.0 || sv != 0.0) {
                    throw std::invalid_argument(
                        "build_subproblem: expansion uses a slot beyond the user's deadline");
                }
            }
        }
    }

    ConvexSubproblem sub;
    sub.power_scale = pmax;
    const auto groups = element_groups(inst, sub.num_groups);

    // Variable indices; -1 where eliminated by the delay constraint.
    Grid3 ipb(d, -1.0), ip(d, -1.0), is(d, -1.0);
    auto add_var = [&](VarKind kind, int k, int m, int n) {
        sub.vars.push_back(VarInfo{kind, k, m, n});
        sub.group.push_back(groups[m * d.slots + n]);
        return static_cast<int>(sub.vars.size()) - 1;
    };
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            for (int k = 0; k < d.users; ++k) {
                if (!inst.allowed(k, n)) continue;
                ipb(k, m, n) = add_var(VarKind::p_bar, k, m, n);
                ip(k, m, n) = add_var(VarKind::p, k, m, n);
                is(k, m, n) = add_var(VarKind::s, k, m, n);
            }
        }
    }
    const int nv = sub.num_vars();
    sub.objective_linear.assign(static_cast<std::size_t>(nv), 0.0);

    // Objective: sum_k w_k [-Fbar_k + Vbar_k(ref) + grad^T (pbar - ref)]
    //            + beta [sum (1 - 2 s_ref) s + sum s_ref^2]
    for (int k = 0; k < d.users; ++k) {
        const double w = inst.qos(k).weight;
        const auto lin = linearize_vbar(inst, k, expansion.p_bar.user(k), opts.rate_model);
        sub.objective_constant += w * lin.value;

        ConcaveRow c1;
        c1.user = k;
        c1.rhs = inst.qos(k).bits_required;
        c1.constant = -lin.value;
        for (int m = 0; m < d.subcarriers; ++m) {
            const double g = inst.gain(k, m) * pmax;
            for (int n = 0; n < d.slots; ++n) {
                if (!inst.allowed(k, n)) continue;
                const int v = static_cast<int>(ipb(k, m, n));
                const double grad = lin.grad[m * d.slots + n];
                const double ref = expansion.p_bar(k, m, n);
                sub.objective_logs.push_back(LogTerm{v, g, w});
                sub.objective_linear[v] += w * grad * pmax;
                sub.objective_constant -= w * grad * ref;
                c1.logs.push_back(LogTerm{v, g, 1.0});
                if (grad != 0.0) c1.linear.push_back(LinearTerm{v, -grad * pmax});
                c1.constant += grad * ref;
            }
        }
        sub.concave_rows.push_back(std::move(c1));
    }
    for (int k = 0; k < d.users; ++k) {
        for (int m = 0; m < d.subcarriers; ++m) {
            for (int n = 0; n < d.slots; ++n) {
                if (!inst.allowed(k, n)) continue;
                const double sr = expansion.s(k, m, n);
                sub.objective_linear[static_cast<int>(is(k, m, n))] += opts.beta * (1.0 - 2.0 * sr);
                sub.objective_constant += opts.beta * sr * sr;
            }
        }
    }

    // Per-element rows (scaled: x = pbar / Pmax, y = p / Pmax).
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            LinearRow c5{{}, 1.0, RowFamily::C5};
            for (int k = 0; k < d.users; ++k) {
                if (!inst.allowed(k, n)) continue;
                const int x = static_cast<int>(ipb(k, m, n));
                const int y = static_cast<int>(ip(k, m, n));
                const int s = static_cast<int>(is(k, m, n));
                sub.rows.push_back({{{x, 1.0}, {s, -1.0}}, 0.0, RowFamily::C7});
                sub.rows.push_back({{{x, 1.0}, {y, -1.0}}, 0.0, RowFamily::C8});
                sub.rows.push_back({{{y, 1.0}, {x, -1.0}, {s, 1.0}}, 1.0, RowFamily::C9});
                sub.rows.push_back({{{x, -1.0}}, 0.0, RowFamily::C10});
                sub.rows.push_back({{{y, -1.0}}, 0.0, RowFamily::C2});
                sub.rows.push_back({{{s, -1.0}}, 0.0, RowFamily::C4b_lower});
                sub.rows.push_back({{{s, 1.0}}, 1.0, RowFamily::C4b_upper});
                c5.terms.push_back({s, 1.0});
            }
            if (!c5.terms.empty()) sub.rows.push_back(std::move(c5));
        }
    }
    LinearRow c3{{}, 1.0, RowFamily::C3};
    for (int v = 0; v < nv; ++v) {
        if (sub.vars[v].kind == VarKind::p_bar) c3.terms.push_back({v, 1.0});
    }
    sub.rows.push_back(std::move(c3));
    return sub;
}

double exact_penalized_objective(const ProblemInstance& inst, const Grid3& p_bar, const Grid3& s,
                                 double beta, RateModel model) {
    const Dims d = inst.dims();
    double f = 0.0;
    for (int k = 0; k < d.users; ++k) {
        const auto gains = inst.user_gains(k);
        const auto ub = fbl::user_bits(gains, p_bar.user(k), eps_for(inst, k, model));
        f += inst.qos(k).weight * (ub.dispersion_bits - ub.capacity_bits);
    }
    const auto pen = penalty_terms(s.values());
    return f + beta * pen.gap();
}

std::vector<double> to_variables(const ConvexSubproblem& sub, const AllocationState& state) {
    std::vector<double> x(sub.vars.size());
    for (std::size_t i = 0; i < sub.vars.size(); ++i) {
        const auto& v = sub.vars[i];
        switch (v.kind) {
            case VarKind::p_bar:
                x[i] = state.p_bar(v.user, v.subcarrier, v.slot) / sub.power_scale;
                break;
            case VarKind::p: x[i] = state.p(v.user, v.subcarrier, v.slot) / sub.power_scale; break;
            case VarKind::s: x[i] = state.s(v.user, v.subcarrier, v.slot); break;
        }
    }
    return x;
}

void scatter_variables(const ConvexSubproblem& sub, std::span<const double> x,
                       AllocationState& state) {
    for (std::size_t i = 0; i < sub.vars.size(); ++i) {
        const auto& v = sub.vars[i];
        switch (v.kind) {
            case VarKind::p_bar:
                state.p_bar(v.user, v.subcarrier, v.slot) = x[i] * sub.power_scale;
                break;
            case VarKind::p: state.p(v.user, v.subcarrier, v.slot) = x[i] * sub.power_scale; break;
            case VarKind::s: state.s(v.user, v.subcarrier, v.slot) = x[i]; break;
        }
    }
}

ConvexSubproblem build_power_subproblem(const ProblemInstance& inst, const Grid3& assignment,
                                        const Grid3& expansion, RateModel model) {
    const Dims d = inst.dims();
    if (!(assignment.dims() == d) || !(expansion.dims() == d)) {
        throw std::invalid_argument("build_power_subproblem: dims differ from instance");
    }
    const double pmax = inst.p_max();
    ConvexSubproblem sub;
    sub.power_scale = pmax;

    Grid3 idx(d, -1.0);
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            for (int k = 0; k < d.users; ++k) {
                if (assignment(k, m, n) != 1.0) continue;
                if (!inst.allowed(k, n)) {
                    throw std::invalid_argument("build_power_subproblem: assignment violates C6");
                }
                if (!(expansion(k, m, n) >= 0.0)) {
                    throw std::invalid_argument("build_power_subproblem: negative expansion power");
                }
                idx(k, m, n) = sub.num_vars();
                sub.vars.push_back(VarInfo{VarKind::p_bar, k, m, n});
                sub.group.push_back(sub.num_groups++);
            }
        }
    }
    sub.objective_linear.assign(sub.vars.size(), 0.0);

    for (int k = 0; k < d.users; ++k) {
        const double w = inst.qos(k).weight;
        const double eps = eps_for(inst, k, model);
        std::vector<double> gains, ref;
        std::vector<int> vars;
        for (int m = 0; m < d.subcarriers; ++m) {
            for (int n = 0; n < d.slots; ++n) {
                if (idx(k, m, n) < 0.0) continue;
                gains.push_back(inst.gain(k, m));
                ref.push_back(expansion(k, m, n));
                vars.push_back(static_cast<int>(idx(k, m, n)));
            }
        }
        ConcaveRow c1;
        c1.user = k;
        c1.rhs = inst.qos(k).bits_required;
        double value = 0.0;
        std::vector<double> grad(gains.size(), 0.0);
        if (eps < 0.5 && !gains.empty()) {
            value = fbl::vbar_user(gains, ref, eps);
            grad = fbl::grad_vbar(gains, ref, eps);
        }
        sub.objective_constant += w * value;
        c1.constant = -value;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            const double g = gains[i] * pmax;
            sub.objective_logs.push_back(LogTerm{vars[i], g, w});
            sub.objective_linear[vars[i]] += w * grad[i] * pmax;
            sub.objective_constant -= w * grad[i] * ref[i];
            c1.logs.push_back(LogTerm{vars[i], g, 1.0});
            if (grad[i] != 0.0) c1.linear.push_back(LinearTerm{vars[i], -grad[i] * pmax});
            c1.constant += grad[i] * ref[i];
        }
        sub.concave_rows.push_back(std::move(c1));
    }

    LinearRow c3{{}, 1.0, RowFamily::C3};
    for (int v = 0; v < sub.num_vars(); ++v) {
        sub.rows.push_back({{{v, -1.0}}, 0.0, RowFamily::C10});
        c3.terms.push_back({v, 1.0});
    }
    sub.rows.push_back(std::move(c3));
    return sub;
}

namespace {

struct AssignmentUserTerms {
    std::vector<double> capacity;    // log2(1 + p0 g) per element
    std::vector<double> dispersion;  // V(p0 g) per element
};

AssignmentUserTerms assignment_terms(const ProblemInstance& inst, int k,
                                     std::span<const double> power) {
    const Dims d = inst.dims();
    AssignmentUserTerms t;
    t.capacity.resize(static_cast<std::size_t>(d.resource_elements()));
    t.dispersion.resize(t.capacity.size());
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            const auto rp = fbl::rate_point(power[m * d.slots + n] * inst.gain(k, m));
            t.capacity[m * d.slots + n] = rp.bits_shannon;
            t.dispersion[m * d.slots + n] = rp.dispersion;
        }
    }
    return t;
}

void check_profile(const ProblemInstance& inst, std::span<const double> power) {
    if (static_cast<int>(power.size()) != inst.dims().resource_elements()) {
        throw std::invalid_argument("element power profile must have M*N entries");
    }
    for (double v : power) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("element power must be finite and nonnegative");
        }
    }
}

}  // namespace

ConvexSubproblem build_assignment_subproblem(const ProblemInstance& inst,
                                             const Grid3& s_expansion, double power_per_element,
                                             double beta) {
    const std::vector<double> power(
        static_cast<std::size_t>(inst.dims().resource_elements()), power_per_element);
    return build_assignment_subproblem(inst, s_expansion, power, beta,
                                       RateModel::normal_approximation);
}

ConvexSubproblem build_assignment_subproblem(const ProblemInstance& inst,
                                             const Grid3& s_expansion,
                                             std::span<const double> element_power, double beta,
                                             RateModel model) {
    const Dims d = inst.dims();
    if (!(s_expansion.dims() == d)) {
        throw std::invalid_argument("build_assignment_subproblem: dims differ from instance");
    }
    check_profile(inst, element_power);
    ConvexSubproblem sub;
    sub.power_scale = 1.0;
    const auto groups = element_groups(inst, sub.num_groups);
    Grid3 idx(d, -1.0);
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            for (int k = 0; k < d.users; ++k) {
                if (!inst.allowed(k, n)) {
                    if (s_expansion(k, m, n) != 0.0) {
                        throw std::invalid_argument(
                            "build_assignment_subproblem: expansion violates C6");
                    }
                    continue;
                }
                idx(k, m, n) = sub.num_vars();
                sub.vars.push_back(VarInfo{VarKind::s, k, m, n});
                sub.group.push_back(groups[m * d.slots + n]);
            }
        }
    }
    sub.objective_linear.assign(sub.vars.size(), 0.0);

    for (int k = 0; k < d.users; ++k) {
        const double w = inst.qos(k).weight;
        const double eps = eps_for(inst, k, model);
        const double qinv = eps >= 0.5 ? 0.0 : fbl::q_inv(eps);
        const auto terms = assignment_terms(inst, k, element_power);
        const auto sref = s_expansion.user(k);
        double disp = 0.0;
        for (std::size_t i = 0; i < sref.size(); ++i) disp += sref[i] * terms.dispersion[i];
        const double root = std::sqrt(disp);
        const double value = qinv * root;
        const double scale = qinv / (2.0 * std::max(root, fbl::kDispersionSqrtFloor));

        ConcaveRow c1;
        c1.user = k;
        c1.rhs = inst.qos(k).bits_required;
        c1.constant = -value;
        sub.objective_constant += w * value;
        for (int m = 0; m < d.subcarriers; ++m) {
            for (int n = 0; n < d.slots; ++n) {
                if (idx(k, m, n) < 0.0) continue;
                const int v = static_cast<int>(idx(k, m, n));
                const std::size_t e = static_cast<std::size_t>(m * d.slots + n);
                const double grad = qinv > 0.0 ? scale * terms.dispersion[e] : 0.0;
                sub.objective_linear[v] += w * (grad - terms.capacity[e]);
                sub.objective_constant -= w * grad * sref[e];
                c1.linear.push_back(LinearTerm{v, terms.capacity[e] - grad});
                c1.constant += grad * sref[e];
                const double sr = sref[e];
                sub.objective_linear[v] += beta * (1.0 - 2.0 * sr);
                sub.objective_constant += beta * sr * sr;
            }
        }
        sub.concave_rows.push_back(std::move(c1));
    }

    LinearRow c3{{}, 1.0, RowFamily::C3};
    for (int m = 0; m < d.subcarriers; ++m) {
        for (int n = 0; n < d.slots; ++n) {
            LinearRow c5{{}, 1.0, RowFamily::C5};
            for (int k = 0; k < d.users; ++k) {
                if (idx(k, m, n) < 0.0) continue;
                const int v = static_cast<int>(idx(k, m, n));
                sub.rows.push_back({{{v, -1.0}}, 0.0, RowFamily::C4b_lower});
                sub.rows.push_back({{{v, 1.0}}, 1.0, RowFamily::C4b_upper});
                c5.terms.push_back({v, 1.0});
                c3.terms.push_back({v, element_power[m * d.slots + n] / inst.p_max()});
            }
            if (!c5.terms.empty()) sub.rows.push_back(std::move(c5));
        }
    }
    sub.rows.push_back(std::move(c3));
    return sub;
}

double exact_assignment_objective(const ProblemInstance& inst, const Grid3& s,
                                  double power_per_element, double beta) {
    const std::vector<double> power(
        static_cast<std::size_t>(inst.dims().resource_elements()), power_per_element);
    return exact_assignment_objective(inst, s, power, beta, RateModel::normal_approximation);
}

double exact_assignment_objective(const ProblemInstance& inst, const Grid3& s,
                                  std::span<const double> element_power, double beta,
                                  RateModel model) {
    const Dims d = inst.dims();
    check_profile(inst, element_power);
    double f = 0.0;
    for (int k = 0; k < d.users; ++k) {
        const auto terms = assignment_terms(inst, k, element_power);
        const auto sk = s.user(k);
        double cap = 0.0, disp = 0.0;
        for (std::size_t i = 0; i < sk.size(); ++i) {
            cap += sk[i] * terms.capacity[i];
            disp += sk[i] * terms.dispersion[i];
        }
        const double eps = eps_for(inst, k, model);
        const double qinv = eps >= 0.5 ? 0.0 : fbl::q_inv(eps);
        f += inst.qos(k).weight * (qinv * std::sqrt(disp) - cap);
    }
    return f + beta * penalty_terms(s.values()).gap();
}

}  // namespace urllc
