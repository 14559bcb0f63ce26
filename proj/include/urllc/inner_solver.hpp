// SPDX-License-Identifier: Apache-2.0
//
// Primal log-barrier interior-point method for ConvexSubproblem.
//
// Newton systems have the shape  blockdiag(D_g) + U U^T  where each block
// collects the rows confined to one variable group and the columns of U come
// from rows spanning several groups (the power budget and the per-user rate
// rows). They are solved with block Cholesky plus a Woodbury correction and
// one step of iterative refinement. Phase 1 minimizes a shared slack to find
// a strictly feasible start or certify that none exists.

#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "urllc/subproblem.hpp"

namespace urllc {

struct InnerConfig {
    /// Stop once the barrier duality gap m/t drops below gap_tol * max(1, |f0|).
    double gap_tol = 1e-7;
    double t0 = 1.0;
    double mu = 10.0;
    /// Centering ends when the squared Newton decrement / 2 is below this.
    double newton_tol = 1e-10;
    int max_newton_steps = 3000;
    /// Phase-1 lower bound above this certifies infeasibility.
    double infeasibility_tol = 1e-9;
    /// Optional per-iteration trace: phase, step, t, decrement, objective.
    std::ostream* trace = nullptr;
};

enum class InnerStatus { optimal, infeasible, max_iterations };

std::string_view status_name(InnerStatus s);

struct InnerSolution {
    InnerStatus status = InnerStatus::max_iterations;
    std::vector<double> point;
    double objective_value = 0.0;
    /// Lagrange dual value reconstructed from the barrier multipliers.
    double dual_bound = 0.0;
    double duality_gap = 0.0;
    /// Infinity norm of the Lagrangian gradient at the barrier multipliers.
    double kkt_residual = 0.0;
    double max_violation = 0.0;
    /// Phase-1 certificate: lower bound on the best achievable max violation.
    double phase1_bound = 0.0;
    bool phase1_used = false;
    int newton_steps = 0;
};

/// Solve `sub`. `start` is an optional initial point; if it is strictly
/// feasible phase 1 is skipped. Never throws on infeasibility.
InnerSolution solve(const ConvexSubproblem& sub, const InnerConfig& cfg,
                    std::span<const double> start = {});

}  // namespace urllc
