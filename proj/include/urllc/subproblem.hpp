// SPDX-License-Identifier: Apache-2.0
//
// Convex subproblem in the form consumed by the barrier solver:
//
//   minimize   -sum_i w_i log2(1 + g_i x_{v_i}) + c^T x + c0
//   subject to a_j^T x <= b_j                              (linear rows)
//              sum_i w_i log2(1 + g_i x_{v_i}) + l^T x + l0 >= rhs   (concave rows)
//
// Power variables are normalized by `power_scale` (P_max) so all variables
// are O(1). Each variable belongs to a group (one resource element); rows
// confined to one group are cheap for the Newton solver.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace urllc {

enum class VarKind : std::uint8_t { p_bar, p, s };

struct VarInfo {
    VarKind kind = VarKind::p_bar;
    int user = 0;
    int subcarrier = 0;
    int slot = 0;
};

/// weight * log2(1 + gain * x[var])
struct LogTerm {
    int var = 0;
    double gain = 0.0;
    double weight = 1.0;
};

struct LinearTerm {
    int var = 0;
    double coeff = 0.0;
};

/// Constraint family tags, used for dumps and for auditing solutions.
enum class RowFamily : std::uint8_t { C2, C3, C4b_lower, C4b_upper, C5, C7, C8, C9, C10 };

std::string_view family_name(RowFamily f);

/// sum(terms) <= bound
struct LinearRow {
    std::vector<LinearTerm> terms;
    double bound = 0.0;
    RowFamily family = RowFamily::C3;
};

/// sum(logs) + sum(linear) + constant >= rhs; the linearized C1 of one user.
struct ConcaveRow {
    int user = 0;
    std::vector<LogTerm> logs;
    std::vector<LinearTerm> linear;
    double constant = 0.0;
    double rhs = 0.0;
};

struct ConvexSubproblem {
    std::vector<VarInfo> vars;
    std::vector<int> group;  // group id per variable
    int num_groups = 0;
    double power_scale = 1.0;

    std::vector<LogTerm> objective_logs;   // enter the objective with a minus sign
    std::vector<double> objective_linear;  // dense, one per variable
    double objective_constant = 0.0;

    std::vector<LinearRow> rows;
    std::vector<ConcaveRow> concave_rows;

    int num_vars() const { return static_cast<int>(vars.size()); }
    std::size_t num_inequalities() const { return rows.size() + concave_rows.size(); }

    double objective(std::span<const double> x) const;
    /// lhs - rhs of a concave row; >= 0 when satisfied.
    double concave_slack(const ConcaveRow& row, std::span<const double> x) const;
    /// Largest violation over all rows (0 when feasible).
    double max_violation(std::span<const double> x) const;
    /// Throws std::logic_error if a row references an undeclared variable.
    void validate() const;
};

/// Human-readable listing of variables, objective and rows.
void dump_subproblem(const ConvexSubproblem& sub, std::ostream& os);

}  // namespace urllc
