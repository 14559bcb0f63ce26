// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "test_util.hpp"
#include "urllc/experiment.hpp"

using namespace urllc;

namespace {

ExperimentSpec small_spec() {
    auto spec = preset_spec(Preset::desk, SweepAxis::p_max_dbm);
    spec.num_subcarriers = 4;
    spec.num_slots = 2;
    spec.num_users = 2;
    spec.qos = {QoSProfile{8.0, 1e-6, 1, 1}, QoSProfile{8.0, 1e-6, 2, 1}};
    spec.sweep_values = {25.0, 35.0};
    spec.realizations = 3;
    spec.schemes = {SchemeId::proposed, SchemeId::upper_bound, SchemeId::benchmark1};
    return spec;
}

std::string csv_of(const ResultTable& t) {
    std::ostringstream os;
    write_csv(t, os);
    return os.str();
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("presets validate") {
    for (auto p : {Preset::desk, Preset::paper})
        for (auto a : {SweepAxis::p_max_dbm, SweepAxis::num_users}) CHECK_NOTHROW(preset_spec(p, a).validate());
    const auto paper = preset_spec(Preset::paper, SweepAxis::p_max_dbm);
    CHECK(paper.num_subcarriers == 64);
    CHECK(paper.realizations == 100);
    const auto users = preset_spec(Preset::desk, SweepAxis::num_users);
    CHECK(users.max_users() == 6);
    CHECK(users.qos[0].delay_slots == 2);
    CHECK(users.qos[3].delay_slots == 4);
}

TEST_CASE("validation errors") {
    auto spec = small_spec();
    spec.schemes.clear();
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = small_spec();
    spec.realizations = 0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = small_spec();
    spec.num_users = 3;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = small_spec();
    spec.schemes.push_back(SchemeId::proposed);
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = small_spec();
    spec.schemes = {SchemeId::oracle};
    spec.num_subcarriers = 12;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("json config overlays") {
    auto spec = spec_from_json(R"({"sweep": {"values": [30]}, "realizations": 2,
        "qos": {"error_prob": 1e-5}, "schemes": ["benchmark2"], "solver": {"j_max": 3},
        "output": {"dir": "x", "stem": "y"}})", small_spec());
    CHECK(spec.sweep_values == std::vector<double>{30.0});
    CHECK(spec.realizations == 2);
    CHECK(spec.qos[1].error_prob == 1e-5);
    CHECK(spec.qos[1].delay_slots == 2);
    CHECK(spec.solver.j_max == 3);
    CHECK(spec.out_stem == "y");
    CHECK_THROWS_AS(spec_from_json(R"({"realisations": 2})", small_spec()), std::invalid_argument);
    CHECK_THROWS_AS(spec_from_json(R"({"realizations": "two"})", small_spec()), std::invalid_argument);
    CHECK_THROWS_AS(spec_from_json("[1]", small_spec()), std::invalid_argument);
}

TEST_CASE("paired realizations") {
    const auto spec = small_spec();
    const auto a = make_instance(spec, 25.0, 1), b = make_instance(spec, 35.0, 1);
    CHECK(a.gains() == b.gains());
    CHECK(a.gains() != make_instance(spec, 25.0, 2).gains());
    CHECK(realization_seed(1, 0) != realization_seed(2, 0));
}

TEST_CASE("run, determinism and serialization") {
    auto spec = small_spec();
    const auto t1 = run_experiment(spec);
    spec.workers = 3;
    const auto t2 = run_experiment(spec);
    CHECK(t1 == t2);
    CHECK(csv_of(t1) == csv_of(t2));
    CHECK(t1.cells.size() == 6);

    for (double p : spec.sweep_values) {
        const auto* ub = t1.find(p, SchemeId::upper_bound);
        const auto* b1 = t1.find(p, SchemeId::benchmark1);
        REQUIRE(ub);
        REQUIRE(b1);
        for (int r = 0; r < ub->realizations(); ++r) CHECK(b1->metrics[r] <= ub->metrics[r] + 1e-12);
    }

    const auto csv = csv_of(t1);
    CHECK(csv.rfind("sweep_value,scheme,mean_throughput_bps_hz,stderr,infeasible_fraction,realizations,runtime_s\n", 0) == 0);
    CHECK(table_from_json(table_to_json(t1)) == t1);

    const auto dir = std::filesystem::temp_directory_path() / "urllc_experiment_test";
    std::filesystem::remove_all(dir);
    ensure_writable(dir);
    emit_results(t1, dir, "run");
    std::ifstream in(dir / "run.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == csv);
    std::filesystem::remove_all(dir);
}

TEST_CASE("single cell") {
    auto spec = small_spec();
    spec.sweep_values = {35.0};
    spec.realizations = 1;
    spec.schemes = {SchemeId::upper_bound};
    const auto t = run_experiment(spec);
    REQUIRE(t.cells.size() == 1);
    const auto rep = solve_upper_bound(make_instance(spec, 35.0, 0), spec.solver);
    CHECK(t.cells[0].mean == rep.metric);
    CHECK(t.cells[0].std_error == 0.0);
    std::istringstream lines(csv_of(t));
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) ++count;
    CHECK(count == 2);
}

TEST_CASE("user sweep") {
    auto spec = preset_spec(Preset::desk, SweepAxis::num_users);
    spec.num_subcarriers = 3;
    spec.num_slots = 2;
    for (auto& q : spec.qos) q.delay_slots = std::min(q.delay_slots, 2);
    spec.sweep_values = {2, 3};
    spec.realizations = 1;
    spec.schemes = {SchemeId::benchmark2};
    const auto t = run_experiment(spec);
    CHECK(t.axis == SweepAxis::num_users);
    CHECK(t.cells.size() == 2);
}

TEST_CASE("summary statistics") {
    CellResult c;
    c.metrics = {1.0, 3.0, 0.0, 4.0};
    c.feasible = {true, true, false, true};
    c.summarize();
    CHECK(c.mean == doctest::Approx(2.0));
    CHECK(c.infeasible_fraction == doctest::Approx(0.25));
    CHECK(c.std_error == doctest::Approx(std::sqrt((1.0 + 1.0 + 4.0 + 4.0) / 3.0 / 4.0)));
}

TEST_CASE("unwritable output") {
    CHECK_THROWS_AS(ensure_writable("/proc/urllc_cannot_exist"), std::runtime_error);
}

}  // TEST_SUITE
