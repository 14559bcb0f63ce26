// SPDX-License-Identifier: Apache-2.0
//
// Builds the convex surrogates solved at every successive-convex-approximation
// step: the big-M joint power/assignment problem with the binary penalty and
// both first-order linearizations, plus the two reduced variants used for
// power restoration (assignment fixed) and equal-power assignment.

#pragma once

#include <span>
#include <vector>

#include "urllc/problem.hpp"
#include "urllc/subproblem.hpp"

namespace urllc {

struct PenaltyTerms {
    double w = 0.0;  // sum s
    double e = 0.0;  // sum s^2
    double gap() const { return w - e; }
};

/// W(s) and E(s). Throws std::invalid_argument for entries outside [0, 1].
PenaltyTerms penalty_terms(std::span<const double> s);

/// Tangent of E at a reference point: s -> offset + slope^T s, where
/// slope = 2 s_ref and offset = -sum s_ref^2. Never exceeds E.
struct AffineE {
    std::vector<double> slope;
    double offset = 0.0;
    double operator()(std::span<const double> s) const;
};

AffineE linearize_E(std::span<const double> s_ref);

struct ReformulationOptions {
    double beta = 0.0;
    /// Shannon drops every dispersion term (objective and C1).
    RateModel rate_model = RateModel::normal_approximation;
};

/// Joint subproblem over (p_bar, p, s) on the resource elements allowed by
/// the delay constraints. The expansion point must have strictly positive
/// p_bar on every allowed element and nothing on forbidden ones.
ConvexSubproblem build_subproblem(const ProblemInstance& inst, const AllocationState& expansion,
                                  const ReformulationOptions& opts);

/// Objective of the penalized problem evaluated exactly (no linearization):
/// sum_k w_k (-Fbar_k + Vbar_k) + beta (W - E).
double exact_penalized_objective(const ProblemInstance& inst, const Grid3& p_bar, const Grid3& s,
                                 double beta,
                                 RateModel model = RateModel::normal_approximation);

/// Map a joint subproblem state to its variable vector (powers scaled).
std::vector<double> to_variables(const ConvexSubproblem& sub, const AllocationState& state);

/// Write variables back into `state` by kind; grid entries without a variable
/// are left untouched.
void scatter_variables(const ConvexSubproblem& sub, std::span<const double> x,
                       AllocationState& state);

/// Power-only subproblem with a fixed binary assignment: variables are p_bar on
/// assigned elements, constraints C3, C10 and the linearized C1. `expansion`
/// gives the linearization point (entries on assigned elements are used).
ConvexSubproblem build_power_subproblem(const ProblemInstance& inst, const Grid3& assignment,
                                        const Grid3& expansion, RateModel model);

/// Assignment-only subproblem at a fixed per-element power: variables are s,
/// the capacity term is linear in s and the dispersion term sqrt(sum s V) is
/// linearized at `s_expansion`.
ConvexSubproblem build_assignment_subproblem(const ProblemInstance& inst,
                                             const Grid3& s_expansion, double power_per_element,
                                             double beta);

/// Same with a per-element power profile (M*N entries, index m*N + n, watts).
ConvexSubproblem build_assignment_subproblem(const ProblemInstance& inst,
                                             const Grid3& s_expansion,
                                             std::span<const double> element_power, double beta,
                                             RateModel model);

/// Exact penalized objective of the assignment-only problem.
double exact_assignment_objective(const ProblemInstance& inst, const Grid3& s,
                                  double power_per_element, double beta);
double exact_assignment_objective(const ProblemInstance& inst, const Grid3& s,
                                  std::span<const double> element_power, double beta,
                                  RateModel model);

}  // namespace urllc
