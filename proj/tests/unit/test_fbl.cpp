// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "urllc/fbl.hpp"

using namespace urllc;
using urllc::test::rel_err;

TEST_SUITE("fbl") {

TEST_CASE("q_inv named points") {
    const auto named = test::load_data("fbl_oracle.json")["named"];
    CHECK(fbl::q_inv(0.5) == 0.0);
    CHECK(std::abs(fbl::q_inv(1e-6) - named["q_inv_1e-6"].get<double>()) < 1e-10);
    CHECK(std::abs(fbl::q_inv(1e-7) - named["q_inv_1e-7"].get<double>()) < 1e-10);
    CHECK(fbl::q_inv(1e-6) == doctest::Approx(4.753424).epsilon(1e-6));
    CHECK(fbl::q_inv(1e-7) == doctest::Approx(5.199337).epsilon(1e-6));
    CHECK(fbl::q_inv(0.9) == doctest::Approx(-fbl::q_inv(0.1)).epsilon(1e-12));
}

TEST_CASE("q_inv rejects the closed ends") {
    CHECK_THROWS_AS(fbl::q_inv(0.0), std::domain_error);
    CHECK_THROWS_AS(fbl::q_inv(1.0), std::domain_error);
    CHECK_THROWS_AS(fbl::q_inv(-0.1), std::domain_error);
    CHECK_THROWS_AS(fbl::q_inv(std::nan("")), std::domain_error);
}

TEST_CASE("q round trip") {
    for (const auto& e : test::load_data("fbl_oracle.json")["q_roundtrip"]) {
        const double x = e["x"], q = e["q"];
        CHECK(rel_err(fbl::q_func(x), q) < 1e-12);
        CHECK(std::abs(fbl::q_inv(q) - x) < 1e-10);
    }
}

TEST_CASE("oracle tables") {
    const auto data = test::load_data("fbl_oracle.json");
    double worst = 0.0;
    for (const auto& e : data["q_inv"]) worst = std::max(worst, std::abs(fbl::q_inv(e["eps"]) - e["value"].get<double>()));
    CHECK(worst < 1e-10);
    worst = 0.0;
    for (const auto& e : data["dispersion"]) worst = std::max(worst, rel_err(fbl::dispersion(e["snr"]), e["value"]));
    CHECK(worst < 1e-8);
    worst = 0.0;
    for (const auto& e : data["normal_approx_bits"]) {
        const auto snrs = e["snrs"].get<std::vector<double>>();
        worst = std::max(worst, rel_err(fbl::normal_approx_bits(snrs, e["eps"]), e["value"]));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("dispersion") {
    CHECK(fbl::dispersion(0.0) == 0.0);
    CHECK(fbl::dispersion(1.0) == doctest::Approx(fbl::kA2 * 0.75).epsilon(1e-14));
    CHECK(fbl::dispersion(1.0) == doctest::Approx(1.561026).epsilon(1e-6));
    CHECK(fbl::dispersion(1e12) == doctest::Approx(2.081368).epsilon(1e-6));
    CHECK(fbl::kA2 == doctest::Approx(2.0813689810056077).epsilon(1e-15));
}

TEST_CASE("normal_approx_bits") {
    const std::vector<double> one{1.0};
    CHECK(fbl::normal_approx_bits(one, 0.5) == doctest::Approx(1.0));
    const std::vector<double> zeros(3, 0.0);
    CHECK(fbl::normal_approx_bits(zeros, 1e-6) == 0.0);
    const std::vector<double> threes(10, 3.0);
    const double want = 20.0 - fbl::q_inv(1e-6) * std::sqrt(10.0 * fbl::kA2 * 15.0 / 16.0);
    CHECK(fbl::normal_approx_bits(threes, 1e-6) == doctest::Approx(want).epsilon(1e-13));
    const double oracle = test::load_data("fbl_oracle.json")["named"]["nab_3x10_1e-6"];
    CHECK(rel_err(fbl::normal_approx_bits(threes, 1e-6), oracle) < 1e-12);
    // short weak packets go negative
    const std::vector<double> weak{0.01};
    CHECK(fbl::normal_approx_bits(weak, 1e-6) < 0.0);
}

TEST_CASE("user_bits") {
    const std::vector<double> g{0.5, 2.0}, p{2.0, 1.0}, zero{0.0, 0.0};
    const auto z = fbl::user_bits(g, zero, 1e-6);
    CHECK(z.capacity_bits == 0.0);
    CHECK(z.dispersion_bits == 0.0);
    CHECK(z.psi == 0.0);

    const std::vector<double> g1{1.0}, p1{1.0};
    const auto u1 = fbl::user_bits(g1, p1, 0.5);
    CHECK(u1.capacity_bits == doctest::Approx(1.0));
    CHECK(u1.dispersion_bits == 0.0);
    CHECK(u1.psi == doctest::Approx(1.0));

    const auto u = fbl::user_bits(g, p, 1e-6);
    const auto want = test::load_data("fbl_oracle.json")["named"]["user_bits_2re"];
    CHECK(u.capacity_bits == doctest::Approx(2.58496).epsilon(1e-5));
    CHECK(rel_err(u.capacity_bits, want[0]) < 1e-12);
    CHECK(rel_err(u.dispersion_bits, want[1]) < 1e-12);
    CHECK(rel_err(u.psi, want[2]) < 1e-12);

    // a mask of ones is the same as no mask; a zero entry drops that element
    const std::vector<double> ones{1.0, 1.0}, first{1.0, 0.0};
    CHECK(fbl::user_bits(g, p, ones, 1e-6).psi == doctest::Approx(u.psi).epsilon(1e-15));
    const std::vector<double> g0{0.5}, p0{2.0};
    CHECK(fbl::user_bits(g, p, first, 1e-6).psi ==
          doctest::Approx(fbl::user_bits(g0, p0, 1e-6).psi).epsilon(1e-14));

    const std::vector<double> bad{1.0};
    CHECK_THROWS(fbl::user_bits(g, bad, 1e-6));
}

TEST_CASE("vbar derivatives against closed forms and differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lg(-2.0, 3.0), lp(-3.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double g = std::pow(10.0, lg(rng)), p = std::pow(10.0, lp(rng));
        const double x = 1.0 + p * g;
        CHECK(rel_err(fbl::vbar_element_d1(g, p), 2.0 * fbl::kA2 * g / (x * x * x)) < 1e-12);
        CHECK(rel_err(fbl::vbar_element_d2(g, p), -6.0 * fbl::kA2 * g * g / (x * x * x * x)) < 1e-12);
        CHECK(fbl::vbar_element_d2(g, p) < 0.0);
        const double h = 1e-3 * p;
        const double fd = (fbl::vbar_element(g, p + h) - fbl::vbar_element(g, p - h)) / (2 * h);
        CHECK(rel_err(fd, fbl::vbar_element_d1(g, p)) < 1e-5);
    }
}

TEST_CASE("grad_vbar") {
    SUBCASE("single element closed form") {
        const std::vector<double> g{1.0}, p{0.7};
        const double v = fbl::vbar_element(1.0, 0.7);
        const double want = fbl::kA2 * fbl::q_inv(1e-6) / std::pow(1.7, 3) / std::sqrt(v);
        CHECK(fbl::grad_vbar(g, p, 1e-6)[0] == doctest::Approx(want).epsilon(1e-13));
    }
    SUBCASE("central differences") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> lg(-1.0, 3.0), up(0.01, 2.0);
        for (int t = 0; t < 50; ++t) {
            std::vector<double> g(6), p(6);
            for (int i = 0; i < 6; ++i) {
                g[i] = std::pow(10.0, lg(rng));
                p[i] = up(rng);
            }
            const auto grad = fbl::grad_vbar(g, p, 1e-5);
            for (int i = 0; i < 6; ++i) {
                auto hi = p, lo = p;
                const double h = 1e-3 * p[i];
                hi[i] += h;
                lo[i] -= h;
                const double fd = (fbl::vbar_user(g, hi, 1e-5) - fbl::vbar_user(g, lo, 1e-5)) / (2 * h);
                CHECK(rel_err(fd, grad[i]) < 1e-5);
            }
        }
    }
    SUBCASE("gain scaling") {
        const std::vector<double> g{0.3, 4.0, 12.0}, p{1.0, 0.2, 0.05};
        const double c = 7.5;
        std::vector<double> gc, pc;
        for (int i = 0; i < 3; ++i) {
            gc.push_back(g[i] * c);
            pc.push_back(p[i] / c);
        }
        const auto a = fbl::grad_vbar(g, p, 1e-6), b = fbl::grad_vbar(gc, pc, 1e-6);
        for (int i = 0; i < 3; ++i) CHECK(b[i] == doctest::Approx(c * a[i]).epsilon(1e-12));
    }
}

}  // TEST_SUITE
