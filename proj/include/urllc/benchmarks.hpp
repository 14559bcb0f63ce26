// SPDX-License-Identifier: Apache-2.0
//
// Comparison schemes: the Shannon upper bound, the two benchmarks that
// either evaluate a Shannon design under the normal approximation or fix an
// equal power split, and an exhaustive oracle for tiny instances.

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "urllc/sca.hpp"

namespace urllc {

enum class SchemeId { proposed, upper_bound, benchmark1, benchmark2, oracle };

std::string_view scheme_name(SchemeId id);
/// Throws std::invalid_argument on unknown names.
SchemeId parse_scheme(std::string_view name);
std::vector<SchemeId> all_schemes();

/// Same pipeline as the proposed scheme with every dispersion term dropped;
/// audited and scored with Shannon bits.
SolveReport solve_upper_bound(const ProblemInstance& inst, const SolverConfig& cfg);

/// The upper-bound allocation re-audited and scored with the normal approximation.
SolveReport benchmark1_from_upper_bound(const ProblemInstance& inst, const SolveReport& upper,
                                        const SolverConfig& cfg);
SolveReport solve_benchmark1(const ProblemInstance& inst, const SolverConfig& cfg);

/// Equal power P_max / (MN) on every element; only the assignment is optimized.
SolveReport solve_benchmark2(const ProblemInstance& inst, const SolverConfig& cfg);

struct OracleOptions {
    int grid = 64;
    int refinements = 2;
    std::size_t max_assignments = 100000;
    /// Upper bound on grid points per pass; the per-element resolution is
    /// reduced when there are many active elements.
    std::size_t max_points_per_pass = 300000;
};

/// Exhaustive search over binary assignments with grid-refined power
/// allocation per assignment. Throws std::length_error when the number of
/// assignments exceeds `max_assignments`.
SolveReport oracle_solve(const ProblemInstance& inst, const OracleOptions& opts = {},
                         double audit_tol = 1e-6);

SolveReport solve_scheme(SchemeId id, const ProblemInstance& inst, const SolverConfig& cfg);

}  // namespace urllc
