// SPDX-License-Identifier: Apache-2.0

#include "urllc/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace urllc {

std::string_view family_name(RowFamily f) {
    switch (f) {
        case RowFamily::C2: return "C2";
        case RowFamily::C3: return "C3";
        case RowFamily::C4b_lower: return "C4b-";
        case RowFamily::C4b_upper: return "C4b+";
        case RowFamily::C5: return "C5";
        case RowFamily::C7: return "C7";
        case RowFamily::C8: return "C8";
        case RowFamily::C9: return "C9";
        case RowFamily::C10: return "C10";
    }
    return "?";
}

double ConvexSubproblem::objective(std::span<const double> x) const {
    double f = objective_constant;
    for (const auto& t : objective_logs) f -= t.weight * std::log2(1.0 + t.gain * x[t.var]);
    for (std::size_t i = 0; i < objective_linear.size(); ++i) f += objective_linear[i] * x[i];
    return f;
}

double ConvexSubproblem::concave_slack(const ConcaveRow& row, std::span<const double> x) const {
    double v = row.constant - row.rhs;
    for (const auto& t : row.logs) v += t.weight * std::log2(1.0 + t.gain * x[t.var]);
    for (const auto& t : row.linear) v += t.coeff * x[t.var];
    return v;
}

double ConvexSubproblem::max_violation(std::span<const double> x) const {
    double worst = 0.0;
    for (const auto& r : rows) {
        double lhs = 0.0;
        for (const auto& t : r.terms) lhs += t.coeff * x[t.var];
        worst = std::max(worst, lhs - r.bound);
    }
    for (const auto& r : concave_rows) worst = std::max(worst, -concave_slack(r, x));
    return worst;
}

void ConvexSubproblem::validate() const {
    const int n = num_vars();
    auto check = [n](int v) {
        if (v < 0 || v >= n) throw std::logic_error("subproblem row references unknown variable");
    };
    if (group.size() != vars.size() || objective_linear.size() != vars.size()) {
        throw std::logic_error("subproblem variable metadata sizes differ");
    }
    for (int g : group) {
        if (g < 0 || g >= num_groups) throw std::logic_error("variable group out of range");
    }
    for (const auto& t : objective_logs) check(t.var);
    for (const auto& r : rows) {
        for (const auto& t : r.terms) check(t.var);
    }
    for (const auto& r : concave_rows) {
        for (const auto& t : r.logs) check(t.var);
        for (const auto& t : r.linear) check(t.var);
    }
}

namespace {

const char* kind_name(VarKind k) {
    switch (k) {
        case VarKind::p_bar: return "pbar";
        case VarKind::p: return "p";
        case VarKind::s: return "s";
    }
    return "?";
}

}  // namespace

void dump_subproblem(const ConvexSubproblem& sub, std::ostream& os) {
    const auto old_prec = os.precision(17);
    os << "# convex subproblem\n";
    os << "variables " << sub.num_vars() << " groups " << sub.num_groups << " power_scale "
       << sub.power_scale << "\n";
    for (int i = 0; i < sub.num_vars(); ++i) {
        const auto& v = sub.vars[i];
        os << "var " << i << ' ' << kind_name(v.kind) << " k=" << v.user << " m=" << v.subcarrier
           << " n=" << v.slot << " group=" << sub.group[i] << "\n";
    }
    os << "objective constant " << sub.objective_constant << "\n";
    for (const auto& t : sub.objective_logs) {
        os << "objective -log2 var " << t.var << " gain " << t.gain << " weight " << t.weight
           << "\n";
    }
    for (int i = 0; i < sub.num_vars(); ++i) {
        if (sub.objective_linear[i] != 0.0) {
            os << "objective linear var " << i << " coeff " << sub.objective_linear[i] << "\n";
        }
    }
    for (std::size_t r = 0; r < sub.rows.size(); ++r) {
        const auto& row = sub.rows[r];
        os << "row " << r << ' ' << family_name(row.family) << " :";
        for (const auto& t : row.terms) os << ' ' << t.coeff << "*x" << t.var;
        os << " <= " << row.bound << "\n";
    }
    for (const auto& row : sub.concave_rows) {
        os << "concave C1 user " << row.user << " :";
        for (const auto& t : row.logs) os << ' ' << t.weight << "*log2(1+" << t.gain << "*x" << t.var << ')';
        for (const auto& t : row.linear) os << ' ' << t.coeff << "*x" << t.var;
        os << " + " << row.constant << " >= " << row.rhs << "\n";
    }
    os.precision(old_prec);
}

}  // namespace urllc
