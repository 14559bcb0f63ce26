// SPDX-License-Identifier: Apache-2.0
//
// JSON serialization of problem instances and solve reports. Doubles are
// written with 17 significant digits so gains round-trip bit-exactly.

#pragma once

#include <filesystem>
#include <string>

#include "urllc/problem.hpp"
#include "urllc/sca.hpp"

namespace urllc {

std::string instance_to_json(const ProblemInstance& inst, int indent = 2);
/// Throws std::invalid_argument on malformed documents.
ProblemInstance instance_from_json(const std::string& text);

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path);
ProblemInstance load_instance(const std::filesystem::path& path);

std::string report_to_json(const SolveReport& rep, int indent = 2);

}  // namespace urllc
