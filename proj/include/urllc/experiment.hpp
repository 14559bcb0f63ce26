// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo experiments: sweeps over P_max or the number of users, paired
// channel realizations across sweep points and schemes, and CSV / JSON
// emission of the per-cell statistics.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "urllc/benchmarks.hpp"
#include "urllc/problem.hpp"
#include "urllc/sca.hpp"

namespace urllc {

enum class SweepAxis { p_max_dbm, num_users };

std::string_view axis_name(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

enum class Preset { desk, paper };

Preset parse_preset(std::string_view name);

struct ExperimentSpec {
    SweepAxis axis = SweepAxis::p_max_dbm;
    std::vector<double> sweep_values;

    int num_subcarriers = 16;
    int num_slots = 6;
    /// Used when sweeping P_max.
    int num_users = 4;
    /// Used when sweeping the number of users.
    double p_max_dbm = 45.0;
    /// One profile per user; must cover the largest K in the sweep.
    std::vector<QoSProfile> qos;
    ChannelGenSpec channel;

    int realizations = 50;
    std::vector<SchemeId> schemes;
    std::uint64_t seed = 1;
    int workers = 1;
    SolverConfig solver;
    OracleOptions oracle;
    /// Record wall time in runtime_s; off by default so output is reproducible.
    bool timing = false;

    std::filesystem::path out_dir = "results";
    std::string out_stem = "experiment";

    /// Throws std::invalid_argument describing the first problem found.
    void validate() const;
    int max_users() const;
};

/// Built-in configurations: `desk` is sized for a laptop, `paper` follows the
/// full system parameters (M = 64, N = 6, 100 realizations).
ExperimentSpec preset_spec(Preset preset, SweepAxis axis);

/// Overlay the keys of a JSON document onto `base`. Unknown keys are rejected.
ExperimentSpec spec_from_json(const std::string& text, ExperimentSpec base);
ExperimentSpec load_spec(const std::filesystem::path& path, ExperimentSpec base);

/// Seed of realization r; shared by every sweep point and scheme.
std::uint64_t realization_seed(std::uint64_t master, int r);

/// Instance for realization r at one sweep point.
ProblemInstance make_instance(const ExperimentSpec& spec, double sweep_value, int r);

struct CellResult {
    double sweep_value = 0.0;
    SchemeId scheme = SchemeId::proposed;
    std::vector<double> metrics;  // one per realization, in order
    std::vector<bool> feasible;
    double mean = 0.0;
    double std_error = 0.0;
    double infeasible_fraction = 0.0;
    double runtime_s = 0.0;

    int realizations() const { return static_cast<int>(metrics.size()); }
    /// Recompute mean, std_error and infeasible_fraction from the arrays.
    void summarize();
};

struct ResultTable {
    SweepAxis axis = SweepAxis::p_max_dbm;
    /// Ordered by sweep point, then by scheme in the spec's order.
    std::vector<CellResult> cells;

    const CellResult* find(double sweep_value, SchemeId scheme) const;
    bool operator==(const ResultTable& other) const;
};

/// Runs every (sweep point, realization) pair on `spec.workers` threads.
/// Results do not depend on the worker count.
ResultTable run_experiment(const ExperimentSpec& spec);

void write_csv(const ResultTable& table, std::ostream& out);
std::string table_to_json(const ResultTable& table, int indent = 2);
ResultTable table_from_json(const std::string& text);

/// Create `dir` if needed and check that files can be written there.
/// Throws std::runtime_error naming the path otherwise.
void ensure_writable(const std::filesystem::path& dir);

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json.
void emit_results(const ResultTable& table, const std::filesystem::path& dir,
                  const std::string& stem);

}  // namespace urllc
