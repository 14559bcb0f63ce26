// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <stdexcept>

#include "doctest.h"
#include "test_util.hpp"
#include "urllc/instance_io.hpp"

using namespace urllc;

TEST_SUITE("io") {

TEST_CASE("instance round trip is bit exact") {
    const auto inst = test::random_instance(123, Dims{3, 5, 2}, 33.3, 17.0, 3e-7, 1);
    CHECK(instance_from_json(instance_to_json(inst)) == inst);
    const auto path = std::filesystem::temp_directory_path() / "urllc_io_roundtrip.json";
    save_instance(inst, path);
    CHECK(load_instance(path) == inst);
    std::filesystem::remove(path);
}

TEST_CASE("malformed instances") {
    CHECK_THROWS_AS(instance_from_json("{"), std::invalid_argument);
    CHECK_THROWS_AS(instance_from_json("{\"dims\": 3}"), std::invalid_argument);
    CHECK_THROWS_AS(load_instance("/nonexistent/urllc.json"), std::runtime_error);
}

TEST_CASE("report serialization") {
    const auto inst = test::random_instance(2, Dims{2, 2, 1}, 35.0, 4.0, 1e-6);
    const auto rep = sca_solve(inst, SolverConfig{});
    const auto j = nlohmann::json::parse(report_to_json(rep));
    CHECK(j["scheme"] == "proposed");
    CHECK(j["feasible"].get<bool>() == rep.feasible);
    CHECK(j["metric"].get<double>() == rep.metric);
    CHECK(j["objective_trace"].size() == rep.objective_trace.size());
}

}  // TEST_SUITE
