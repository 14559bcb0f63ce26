// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "urllc/benchmarks.hpp"
#include "urllc/reformulation.hpp"
#include "urllc/sca.hpp"

using namespace urllc;

TEST_SUITE("sca") {

TEST_CASE("uniform initialization") {
    SUBCASE("two users share every element") {
        const auto inst = test::random_instance(1, Dims{2, 3, 2}, 30.0, 10.0, 1e-6);
        const auto st = initialize(inst, SolverConfig{});
        for (double v : st.s.values()) CHECK(v == 0.5);
        double total = 0.0;
        for (double v : st.p_bar.values()) total += v;
        CHECK(total == doctest::Approx(inst.p_max()).epsilon(1e-14));
    }
    SUBCASE("delay support") {
        const auto base = test::random_instance(1, Dims{2, 2, 2}, 30.0, 10.0, 1e-6);
        const auto inst = base.with_qos({QoSProfile{10, 1e-6, 2, 1}, QoSProfile{10, 1e-6, 1, 1}});
        const auto st = initialize(inst, SolverConfig{});
        for (int m = 0; m < 2; ++m) {
            CHECK(st.s(0, m, 1) == 1.0);
            CHECK(st.s(1, m, 1) == 0.0);
            CHECK(st.p_bar(1, m, 1) == 0.0);
            CHECK(st.s(0, m, 0) == 0.5);
        }
    }
}

TEST_CASE("config validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.j_max = 0;
    CHECK_THROWS(cfg.validate());
    cfg = SolverConfig{};
    cfg.beta = -1.0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("rounding") {
    const auto inst = test::random_instance(1, Dims{3, 2, 1}, 30.0, 0.0, 1e-6);
    Grid3 s(inst.dims());
    s(0, 0, 0) = 0.6;
    s(1, 0, 0) = 0.3;
    s(1, 1, 0) = 0.4;
    s(2, 1, 0) = 0.45;
    const auto r = round_assignment(inst, s, 0.5);
    CHECK(r(0, 0, 0) == 1.0);
    CHECK(r(1, 0, 0) == 0.0);
    for (int k = 0; k < 3; ++k) CHECK(r(k, 1, 0) == 0.0);
    // every element still gets exactly one owner
    const Grid3 power(inst.dims(), inst.p_max() / 2.0);
    const auto a = extract_assignment(inst, s, power, RateModel::normal_approximation);
    for (int m = 0; m < 2; ++m) CHECK(a(0, m, 0) + a(1, m, 0) + a(2, m, 0) == 1.0);
}

TEST_CASE("moves drop an element a satisfied user does not need") {
    // user 1 is strong on element 0 only; element 1 is worth far more to user 0
    const auto inst = ProblemInstance(Dims{2, 2, 1}, 30.0, -132.0, {1e8, 1e10, 1e10, 5e8},
                                      {QoSProfile{0.0, 1e-6, 1, 1}, QoSProfile{4.0, 1e-6, 1, 1}});
    Grid3 s(inst.dims());
    s(1, 0, 0) = s(1, 1, 0) = 0.9;
    const Grid3 power(inst.dims(), inst.p_max() / 2.0);
    const auto a = extract_assignment(inst, s, power, RateModel::normal_approximation);
    CHECK(a(1, 0, 0) == 1.0);
    CHECK(a(0, 1, 0) == 1.0);
}

TEST_CASE("repair moves elements to a starving user") {
    // user 1 has a target and no element after argmax; user 0 has no target
    auto inst = test::flat_instance(Dims{2, 4, 1}, 30.0, 1e12,
                                    {QoSProfile{0.0, 1e-6, 1, 1}, QoSProfile{20.0, 1e-6, 1, 1}});
    Grid3 s(inst.dims());
    for (int m = 0; m < 4; ++m) {
        s(0, m, 0) = 0.9;
        s(1, m, 0) = 0.1;
    }
    const Grid3 power(inst.dims(), inst.p_max() / 4.0);
    const auto a = extract_assignment(inst, s, power, RateModel::normal_approximation);
    double owned = 0.0;
    for (int m = 0; m < 4; ++m) owned += a(1, m, 0);
    CHECK(owned >= 1.0);
    for (int m = 0; m < 4; ++m) CHECK(a(0, m, 0) + a(1, m, 0) == 1.0);
}

TEST_CASE("small instance close to the oracle") {
    const auto inst = test::random_instance(12, Dims{1, 2, 1}, 30.0, 4.0, 1e-6);
    const auto rep = sca_solve(inst, SolverConfig{});
    const auto orc = oracle_solve(inst, OracleOptions{200, 2});
    REQUIRE(orc.feasible);
    REQUIRE(rep.feasible);
    CHECK(rep.metric >= 0.98 * orc.metric);
    CHECK(rep.metric <= orc.metric + 1e-6);
}

TEST_CASE("descent, binary output and feasibility") {
    for (int i = 0; i < 8; ++i) {
        const auto inst = test::random_instance(500 + i, Dims{2, 4, 2}, 35.0, 30.0, 1e-6);
        const auto rep = sca_solve(inst, SolverConfig{});
        CAPTURE(i);
        for (std::size_t j = 1; j < rep.objective_trace.size(); ++j)
            CHECK(rep.objective_trace[j] <= rep.objective_trace[j - 1] + 1e-7);
        CHECK(rep.iterations_used <= 5);
        if (rep.feasible) {
            CHECK(rep.final_alloc.is_consistent_binary());
            CHECK(penalty_terms(rep.final_alloc.s.values()).gap() == 0.0);
            CHECK(check_feasible(inst, rep.final_alloc).feasible);
            CHECK(rep.metric > 0.0);
        } else {
            CHECK(rep.metric == 0.0);
        }
    }
}

TEST_CASE("infeasible QoS is reported, not thrown") {
    const auto inst = test::random_instance(3, Dims{2, 2, 1}, 10.0, 500.0, 1e-6);
    const auto rep = sca_solve(inst, SolverConfig{});
    CHECK_FALSE(rep.feasible);
    CHECK(rep.metric == 0.0);
    CHECK(rep.status != "ok");
}

TEST_CASE("eps = 0.5 makes the proposed scheme the Shannon bound") {
    const auto inst = test::random_instance(77, Dims{2, 3, 1}, 35.0, 6.0, 0.5);
    const auto a = sca_solve(inst, SolverConfig{});
    const auto b = solve_upper_bound(inst, SolverConfig{});
    REQUIRE(a.feasible);
    CHECK(a.metric == doctest::Approx(b.metric).epsilon(1e-9));
}

TEST_CASE("threshold rounding remains selectable") {
    const auto inst = test::random_instance(5, Dims{2, 3, 1}, 40.0, 5.0, 1e-6);
    SolverConfig cfg;
    cfg.rounding = RoundingRule::threshold;
    const auto rep = sca_solve(inst, cfg);
    if (rep.feasible) CHECK(check_feasible(inst, rep.final_alloc).feasible);
    else CHECK(rep.metric == 0.0);
}

TEST_CASE("power restoration keeps the assignment") {
    const auto inst = test::random_instance(8, Dims{2, 2, 1}, 45.0, 2.0, 1e-6);
    Grid3 a(inst.dims());
    a(0, 0, 0) = a(1, 1, 0) = 1.0;
    const Grid3 start(inst.dims(), inst.p_max() / 2.0);
    const auto r = restore_power(inst, a, start, RateModel::normal_approximation, SolverConfig{});
    REQUIRE(r.feasible);
    CHECK(r.p_bar(0, 1, 0) == 0.0);
    CHECK(r.p_bar(1, 0, 0) == 0.0);
    CHECK(r.p_bar(0, 0, 0) + r.p_bar(1, 1, 0) <= inst.p_max() * (1 + 1e-9));
}

}  // TEST_SUITE
