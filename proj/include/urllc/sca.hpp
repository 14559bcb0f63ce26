// SPDX-License-Identifier: Apache-2.0
//
// Successive convex approximation driver for joint power and resource
// element allocation, followed by rounding to a binary assignment and a
// power-only restoration pass.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "urllc/inner_solver.hpp"
#include "urllc/problem.hpp"

namespace urllc {

enum class InitPolicy {
    /// s split evenly among the users allowed in each slot; power spread so
    /// the budget holds with equality.
    uniform,
};

enum class RoundingRule {
    /// Per element, the user with the largest s wins when it exceeds
    /// round_threshold; otherwise the element stays empty.
    threshold,
    /// Per element argmax of s among allowed users, then a greedy repair that
    /// moves elements towards users short of their bit target.
    argmax_repair,
};

struct SolverConfig {
    /// Penalty factor; defaults to 10 log2(1 + P_max / sigma^2).
    std::optional<double> beta;
    int j_max = 5;
    double rel_obj_tol = 1e-5;
    InitPolicy init_policy = InitPolicy::uniform;
    RoundingRule rounding = RoundingRule::argmax_repair;
    double round_threshold = 0.5;
    bool restore = true;
    std::uint64_t rng_seed = 0;
    /// Relative tolerance for the final C1 / C3 audit.
    double audit_tol = 1e-6;
    InnerConfig inner;
    void validate() const;
};

struct SolveReport {
    std::string scheme;
    AllocationState final_alloc;
    bool feasible = false;
    /// Exact penalized objective after each convex subproblem.
    std::vector<double> objective_trace;
    double metric = 0.0;
    int iterations_used = 0;
    double wall_time_s = 0.0;
    /// W(s) - E(s) of the last relaxed iterate, before rounding.
    double relaxation_gap = 0.0;
    std::vector<double> user_bits;
    /// "ok", "subproblem_infeasible", "restoration_infeasible", "audit_failed", ...
    std::string status;
    int newton_steps = 0;
};

AllocationState initialize(const ProblemInstance& inst, const SolverConfig& cfg);

/// Binary assignment from relaxed s: per element, the user with the largest
/// s wins if that value exceeds `threshold`; forbidden slots stay empty.
Grid3 round_assignment(const ProblemInstance& inst, const Grid3& s, double threshold);

/// Argmax rounding followed by the repair pass. `power` gives the transmit
/// power each element would carry (its owner takes all of it) and is used to
/// score moves; bits follow `model`.
Grid3 extract_assignment(const ProblemInstance& inst, const Grid3& s, const Grid3& power,
                         RateModel model);

/// Dispatches on cfg.rounding.
Grid3 binarize(const ProblemInstance& inst, const Grid3& s, const Grid3& power, RateModel model,
               const SolverConfig& cfg);

struct AssignmentSolve {
    bool ok = false;
    /// Relaxed s after the last accepted iterate.
    Grid3 s;
    std::vector<double> objective_trace;
    int iterations = 0;
    int newton_steps = 0;
    /// "ok", "subproblem_infeasible" or "subproblem_failed".
    std::string status;
};

/// Penalized SCA over s alone with every element carrying a fixed power
/// (`element_power`, M*N entries, index m*N + n), started from the uniform
/// split.
AssignmentSolve solve_assignment(const ProblemInstance& inst,
                                 const std::vector<double>& element_power,
                                 const SolverConfig& cfg,
                                 RateModel model = RateModel::normal_approximation);

/// The proposed scheme (dispersion-aware).
SolveReport sca_solve(const ProblemInstance& inst, const SolverConfig& cfg);

/// Shared joint pipeline; `model` selects the bit-count formula used both in
/// the optimization and in the final audit.
SolveReport sca_solve_with_model(const ProblemInstance& inst, const SolverConfig& cfg,
                                 RateModel model);

struct RestoreResult {
    bool feasible = false;
    Grid3 p_bar;
    int newton_steps = 0;
};

/// Power-only successive convex approximation for a fixed binary assignment,
/// linearized first at `expansion` (falls back to an equal split of P_max over
/// the assigned elements when that start is infeasible).
RestoreResult restore_power(const ProblemInstance& inst, const Grid3& assignment,
                            const Grid3& expansion, RateModel model, const SolverConfig& cfg);

}  // namespace urllc
