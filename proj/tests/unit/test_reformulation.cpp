// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "urllc/fbl.hpp"
#include "urllc/reformulation.hpp"
#include "urllc/sca.hpp"

using namespace urllc;

namespace {

// Random relaxed state on the allowed support: s in (0, 1], p_bar in (0, P_max s],
// scaled so the budget holds.
AllocationState random_state(const ProblemInstance& inst, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    const Dims d = inst.dims();
    AllocationState st(d);
    double total = 0.0;
    for (int k = 0; k < d.users; ++k)
        for (int m = 0; m < d.subcarriers; ++m)
            for (int n = 0; n < d.slots; ++n) {
                if (!inst.allowed(k, n)) continue;
                st.s(k, m, n) = u(rng) / d.users;
                st.p_bar(k, m, n) = u(rng) * st.s(k, m, n);
                total += st.p_bar(k, m, n);
            }
    const double scale = u(rng) * inst.p_max() / total;
    for (auto& v : st.p_bar.values()) v *= scale;
    for (std::size_t i = 0; i < st.p.size(); ++i) st.p.values()[i] = st.p_bar.values()[i];
    return st;
}

}  // namespace

TEST_SUITE("reformulation") {

TEST_CASE("penalty terms") {
    const std::vector<double> bin{0, 1, 1, 0, 1}, half{0.5}, zero(4, 0.0);
    CHECK(penalty_terms(bin).gap() == 0.0);
    CHECK(penalty_terms(half).gap() == 0.25);
    CHECK(penalty_terms(zero).w == 0.0);
    CHECK(penalty_terms(zero).e == 0.0);
    const std::vector<double> bad{1.5};
    CHECK_THROWS_AS(penalty_terms(bad), std::invalid_argument);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> s(12);
        for (auto& v : s) v = u(rng);
        CHECK(penalty_terms(s).gap() >= 0.0);
    }
}

TEST_CASE("tangent of E") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<double> zero(5, 0.0);
    const auto flat = linearize_E(zero);
    for (double v : flat.slope) CHECK(v == 0.0);
    CHECK(flat.offset == 0.0);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> r(5), s(5);
        for (auto& v : r) v = u(rng);
        for (auto& v : s) v = u(rng);
        const auto lin = linearize_E(r);
        CHECK(lin(r) == doctest::Approx(penalty_terms(r).e).epsilon(1e-14));
        CHECK(lin(s) <= penalty_terms(s).e + 1e-12);
    }
}

TEST_CASE("joint surrogate is tight and majorizes") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = test::random_instance(100 + trial, Dims{2, 3, 2}, 30.0, 40.0, 1e-6,
                                                trial % 2 ? 1 : 2);
        const double beta = default_penalty(inst);
        const auto base = random_state(inst, rng);
        const ReformulationOptions opts{beta, RateModel::normal_approximation};
        const auto sub = build_subproblem(inst, base, opts);
        CHECK_NOTHROW(sub.validate());

        const auto x0 = to_variables(sub, base);
        const double exact0 = exact_penalized_objective(inst, base.p_bar, base.s, beta);
        CHECK(std::abs(sub.objective(x0) - exact0) < 1e-9 * std::max(1.0, std::abs(exact0)));
        for (const auto& row : sub.concave_rows) {
            const auto g = inst.user_gains(row.user);
            const double psi = fbl::user_bits(g, base.p_bar.user(row.user), inst.qos(row.user).error_prob).psi;
            CHECK(sub.concave_slack(row, x0) ==
                  doctest::Approx(psi - inst.qos(row.user).bits_required).epsilon(1e-9));
        }

        for (int t = 0; t < 20; ++t) {
            const auto other = random_state(inst, rng);
            const auto x = to_variables(sub, other);
            const double exact = exact_penalized_objective(inst, other.p_bar, other.s, beta);
            CHECK(sub.objective(x) >= exact - 1e-9 * std::max(1.0, std::abs(exact)));
            for (const auto& row : sub.concave_rows) {
                const auto g = inst.user_gains(row.user);
                const double psi =
                    fbl::user_bits(g, other.p_bar.user(row.user), inst.qos(row.user).error_prob).psi;
                CHECK(sub.concave_slack(row, x) <= psi - inst.qos(row.user).bits_required + 1e-9);
            }
        }
    }
}

TEST_CASE("scatter inverts to_variables") {
    std::mt19937_64 rng(8);
    const auto inst = test::random_instance(5, Dims{3, 2, 2}, 30.0, 10.0, 1e-6, 1);
    const auto st = random_state(inst, rng);
    const auto sub = build_subproblem(inst, st, ReformulationOptions{1.0});
    AllocationState back(inst.dims());
    scatter_variables(sub, to_variables(sub, st), back);
    for (std::size_t i = 0; i < st.s.size(); ++i) {
        CHECK(back.s.values()[i] == doctest::Approx(st.s.values()[i]));
        CHECK(back.p_bar.values()[i] == doctest::Approx(st.p_bar.values()[i]));
    }
}

TEST_CASE("forbidden slots carry no variables") {
    const auto inst = test::random_instance(5, Dims{2, 2, 3}, 30.0, 10.0, 1e-6, 1);
    const auto sub = build_subproblem(inst, initialize(inst, SolverConfig{}), ReformulationOptions{1.0});
    for (const auto& v : sub.vars) CHECK(v.slot == 0);
    std::ostringstream os;
    dump_subproblem(sub, os);
    CHECK(os.str().find("C7") != std::string::npos);
}

TEST_CASE("shannon model drops the dispersion") {
    const auto inst = test::random_instance(5, Dims{2, 2, 1}, 30.0, 10.0, 1e-6);
    const auto st = initialize(inst, SolverConfig{});
    const auto sub = build_subproblem(inst, st, ReformulationOptions{0.0, RateModel::shannon});
    for (const auto& row : sub.concave_rows) CHECK(row.linear.empty());
    CHECK(exact_penalized_objective(inst, st.p_bar, st.s, 0.0, RateModel::shannon) <
          exact_penalized_objective(inst, st.p_bar, st.s, 0.0));
}

TEST_CASE("assignment surrogate") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto inst = test::random_instance(41, Dims{3, 3, 2}, 35.0, 20.0, 1e-6, 2);
    const double p0 = inst.p_max() / 6.0, beta = default_penalty(inst);
    const auto s0 = initialize(inst, SolverConfig{}).s;
    const auto sub = build_assignment_subproblem(inst, s0, p0, beta);
    AllocationState st0(inst.dims());
    st0.s = s0;
    const double exact0 = exact_assignment_objective(inst, s0, p0, beta);
    CHECK(sub.objective(to_variables(sub, st0)) == doctest::Approx(exact0).epsilon(1e-10));
    for (int t = 0; t < 50; ++t) {
        AllocationState st(inst.dims());
        for (auto& v : st.s.values()) v = u(rng);
        const double exact = exact_assignment_objective(inst, st.s, p0, beta);
        CHECK(sub.objective(to_variables(sub, st)) >= exact - 1e-9 * std::max(1.0, std::abs(exact)));
    }
    // a uniform profile is the scalar overload
    const std::vector<double> profile(6, p0);
    CHECK(exact_assignment_objective(inst, s0, profile, beta, RateModel::normal_approximation) ==
          doctest::Approx(exact0).epsilon(1e-14));
}

}  // TEST_SUITE
