// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "urllc/benchmarks.hpp"

using namespace urllc;

TEST_SUITE("benchmarks") {

TEST_CASE("scheme names") {
    for (auto id : all_schemes()) CHECK(parse_scheme(scheme_name(id)) == id);
    CHECK_THROWS_AS(parse_scheme("nope"), std::invalid_argument);
}

TEST_CASE("upper bound dominates benchmark 1 and the proposed scheme") {
    for (int i = 0; i < 6; ++i) {
        const auto inst = test::random_instance(900 + i, Dims{2, 4, 2}, 38.0, 40.0, 1e-6);
        const auto ub = solve_upper_bound(inst, SolverConfig{});
        const auto b1 = benchmark1_from_upper_bound(inst, ub, SolverConfig{});
        const auto pr = sca_solve(inst, SolverConfig{});
        CAPTURE(i);
        CHECK(b1.metric <= ub.metric + 1e-12);
        if (ub.feasible && pr.feasible) CHECK(pr.metric <= ub.metric + 1e-9);
        // benchmark 1 never changes the allocation
        CHECK(b1.final_alloc.s == ub.final_alloc.s);
    }
}

TEST_CASE("benchmark 1 fails when the Shannon slack is thinner than the dispersion") {
    const auto base = test::random_instance(31, Dims{1, 2, 1}, 30.0, 1.0, 1e-6);
    // the largest Shannon-feasible target is the unconstrained Shannon optimum
    const auto free_ub = solve_upper_bound(base.with_qos({QoSProfile{0.0, 1e-6, 1, 1}}), SolverConfig{});
    REQUIRE(free_ub.feasible);
    const double shannon_bits = free_ub.user_bits[0];
    const auto tight = base.with_qos({QoSProfile{0.999 * shannon_bits, 1e-6, 1, 1}});
    const auto ub = solve_upper_bound(tight, SolverConfig{});
    REQUIRE(ub.feasible);
    const auto b1 = benchmark1_from_upper_bound(tight, ub, SolverConfig{});
    CHECK_FALSE(b1.feasible);
    CHECK(b1.metric == 0.0);
}

TEST_CASE("eps = 0.5 makes benchmark 1 the upper bound") {
    const auto inst = test::random_instance(4, Dims{2, 3, 1}, 35.0, 5.0, 0.5);
    const auto ub = solve_upper_bound(inst, SolverConfig{});
    const auto b1 = benchmark1_from_upper_bound(inst, ub, SolverConfig{});
    REQUIRE(ub.feasible);
    CHECK(b1.metric == doctest::Approx(ub.metric).epsilon(1e-12));
}

TEST_CASE("benchmark 2 uses P_max / MN per assigned element") {
    const auto inst = test::random_instance(15, Dims{3, 4, 2}, 40.0, 10.0, 1e-6);
    const auto rep = solve_benchmark2(inst, SolverConfig{});
    REQUIRE(rep.feasible);
    const double p0 = inst.p_max() / 8.0;
    double total = 0.0;
    int assigned = 0;
    for (std::size_t i = 0; i < rep.final_alloc.s.size(); ++i) {
        if (rep.final_alloc.s.values()[i] == 1.0) {
            ++assigned;
            CHECK(rep.final_alloc.p_bar.values()[i] == doctest::Approx(p0).epsilon(1e-15));
        }
        total += rep.final_alloc.p_bar.values()[i];
    }
    CHECK(total == doctest::Approx(p0 * assigned));
    CHECK(total <= inst.p_max() * (1 + 1e-12));
    for (std::size_t j = 1; j < rep.objective_trace.size(); ++j)
        CHECK(rep.objective_trace[j] <= rep.objective_trace[j - 1] + 1e-7);
}

TEST_CASE("flat single-user channel: equal power is optimal") {
    auto inst = test::flat_instance(Dims{1, 3, 2}, 30.0, 2e11, {QoSProfile{20.0, 1e-6, 2, 1}});
    const auto pr = sca_solve(inst, SolverConfig{});
    const auto b2 = solve_benchmark2(inst, SolverConfig{});
    REQUIRE(pr.feasible);
    REQUIRE(b2.feasible);
    CHECK(pr.metric == doctest::Approx(b2.metric).epsilon(0.01));
}

TEST_CASE("oracle") {
    SUBCASE("one element takes the full budget") {
        auto inst = test::flat_instance(Dims{1, 1, 1}, 30.0, 1e10, {QoSProfile{2.0, 1e-6, 1, 1}});
        const auto rep = oracle_solve(inst);
        REQUIRE(rep.feasible);
        CHECK(rep.final_alloc.p_bar(0, 0, 0) == doctest::Approx(inst.p_max()).epsilon(1e-9));
        CHECK(rep.metric == doctest::Approx(user_bit_counts(inst, rep.final_alloc)[0]));
    }
    SUBCASE("no QoS: each element goes to its stronger user") {
        const auto inst = ProblemInstance(Dims{2, 2, 1}, 30.0, -132.0, {1e11, 5e9, 4e9, 2e11},
                                          {QoSProfile{0.0, 0.5, 1, 1}, QoSProfile{0.0, 0.5, 1, 1}});
        const auto rep = oracle_solve(inst);
        REQUIRE(rep.feasible);
        CHECK(rep.final_alloc.s(0, 0, 0) == 1.0);
        CHECK(rep.final_alloc.s(1, 1, 0) == 1.0);
    }
    SUBCASE("impossible QoS") {
        const auto inst = test::random_instance(2, Dims{2, 2, 1}, 0.0, 400.0, 1e-6);
        const auto rep = oracle_solve(inst);
        CHECK_FALSE(rep.feasible);
        CHECK(rep.metric == 0.0);
    }
    SUBCASE("size cap") {
        const auto inst = test::random_instance(2, Dims{4, 6, 2}, 30.0, 1.0, 1e-6);
        CHECK_THROWS_AS(oracle_solve(inst), std::length_error);
    }
    SUBCASE("dominates the proposed scheme") {
        for (int i = 0; i < 5; ++i) {
            const auto inst = test::random_instance(70 + i, Dims{2, 2, 1}, 30.0, 6.0, 1e-6);
            const auto orc = oracle_solve(inst);
            const auto pr = sca_solve(inst, SolverConfig{});
            if (pr.feasible) {
                CHECK(orc.feasible);
                CHECK(orc.metric >= pr.metric - 1e-6 * std::max(1.0, pr.metric));
            }
        }
    }
}

TEST_CASE("solve_scheme dispatch") {
    const auto inst = test::random_instance(3, Dims{2, 2, 1}, 35.0, 4.0, 1e-6);
    for (auto id : all_schemes()) {
        const auto rep = solve_scheme(id, inst, SolverConfig{});
        CHECK(rep.scheme == scheme_name(id));
    }
}

}  // TEST_SUITE
