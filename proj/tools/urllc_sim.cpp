// SPDX-License-Identifier: Apache-2.0
//
// urllc-sim: sweeps, single solves and oracle comparisons from the shell.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "urllc/benchmarks.hpp"
#include "urllc/experiment.hpp"
#include "urllc/instance_io.hpp"
#include "urllc/reformulation.hpp"

namespace {

using namespace urllc;

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> realizations;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::string> schemes;
    std::string preset = "desk";
    bool timing = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config, "JSON experiment file overlaid on the preset");
    app->add_option("--seed", f.seed, "Master seed");
    app->add_option("--realizations", f.realizations, "Channel realizations per point");
    app->add_option("--workers", f.workers, "Worker threads");
    app->add_option("--out", f.out, "Output directory");
    app->add_option("--schemes", f.schemes,
                    "Comma-separated list: proposed,upper_bound,benchmark1,benchmark2,oracle");
    app->add_option("--preset", f.preset, "desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    app->add_flag("--timing", f.timing, "Record wall time in runtime_s");
}

std::vector<SchemeId> parse_scheme_list(const std::string& text) {
    std::vector<SchemeId> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_scheme(item));
    }
    return out;
}

ExperimentSpec build_spec(const CommonFlags& f, SweepAxis axis) {
    ExperimentSpec spec = preset_spec(parse_preset(f.preset), axis);
    if (!f.config.empty()) spec = load_spec(f.config, spec);
    if (spec.axis != axis) throw std::invalid_argument("config sweep axis does not match command");
    if (f.seed) spec.seed = *f.seed;
    if (f.realizations) spec.realizations = *f.realizations;
    if (f.workers) spec.workers = *f.workers;
    if (f.out) spec.out_dir = *f.out;
    if (f.schemes) spec.schemes = parse_scheme_list(*f.schemes);
    if (f.timing) spec.timing = true;
    return spec;
}

int run_sweep(const CommonFlags& f, SweepAxis axis) {
    ExperimentSpec spec;
    try {
        spec = build_spec(f, axis);
        spec.validate();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    try {
        ensure_writable(spec.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    const auto table = run_experiment(spec);
    try {
        emit_results(table, spec.out_dir, spec.out_stem);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    write_csv(table, std::cout);
    return 0;
}

struct SolveOneFlags {
    CommonFlags common;
    std::string instance;
    std::string scheme = "proposed";
    std::optional<double> p_max_dbm;
    std::optional<int> users;
    int realization = 0;
    std::string dump;
    std::string save_instance;
};

int run_solve_one(const SolveOneFlags& f) {
    std::optional<ProblemInstance> inst;
    SolverConfig solver;
    try {
        const SchemeId id = parse_scheme(f.scheme);
        if (!f.instance.empty()) {
            inst = load_instance(f.instance);
            if (!f.common.config.empty()) {
                solver = load_spec(f.common.config, preset_spec(Preset::desk, SweepAxis::p_max_dbm))
                             .solver;
            }
        } else {
            ExperimentSpec spec = build_spec(f.common, SweepAxis::p_max_dbm);
            if (f.users) spec.num_users = *f.users;
            const double p = f.p_max_dbm.value_or(spec.sweep_values.back());
            spec.sweep_values = {p};
            spec.schemes = {id};
            spec.validate();
            solver = spec.solver;
            inst = make_instance(spec, p, f.realization);
        }
        if (!f.save_instance.empty()) save_instance(*inst, f.save_instance);
        if (!f.dump.empty()) {
            std::ofstream out(f.dump);
            if (!out) throw std::runtime_error("cannot open " + f.dump);
            const ReformulationOptions opts{solver.beta.value_or(default_penalty(*inst)),
                                            id == SchemeId::upper_bound
                                                ? RateModel::shannon
                                                : RateModel::normal_approximation};
            dump_subproblem(build_subproblem(*inst, initialize(*inst, solver), opts), out);
        }
        const auto rep = solve_scheme(id, *inst, solver);
        std::cout << report_to_json(rep) << '\n';
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}

struct OracleFlags {
    int instances = 30;
    std::uint64_t seed = 7;
    int users = 2;
    int subcarriers = 2;
    int slots = 1;
    double p_max_dbm = 30.0;
    double bits = 8.0;
    double error_prob = 1e-6;
    int grid = 64;
};

int run_oracle_check(const OracleFlags& f) {
    int both = 0, worst_idx = -1, false_feasible = 0;
    double worst = 1.0;
    try {
        std::vector<QoSProfile> qos(f.users, QoSProfile{f.bits, f.error_prob, f.slots, 1.0});
        OracleOptions opts;
        opts.grid = f.grid;
        std::printf("instance,proposed_feasible,proposed_metric,oracle_feasible,oracle_metric,ratio\n");
        for (int i = 0; i < f.instances; ++i) {
            ChannelGenSpec ch;
            ch.rng_seed = realization_seed(f.seed, i);
            const auto inst =
                generate_instance(ch, Dims{f.users, f.subcarriers, f.slots}, f.p_max_dbm, qos);
            const auto prop = sca_solve(inst, SolverConfig{});
            const auto orc = oracle_solve(inst, opts);
            double ratio = 0.0;
            if (prop.feasible && orc.feasible) {
                ++both;
                ratio = orc.metric > 0.0 ? prop.metric / orc.metric : 1.0;
                if (ratio < worst) {
                    worst = ratio;
                    worst_idx = i;
                }
            }
            if (prop.feasible && !orc.feasible) ++false_feasible;
            std::printf("%d,%d,%.10g,%d,%.10g,%.6f\n", i, prop.feasible ? 1 : 0, prop.metric,
                        orc.feasible ? 1 : 0, orc.metric, ratio);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    std::fprintf(stderr, "both feasible: %d, worst ratio %.6f (instance %d), proposed feasible where oracle is not: %d\n",
                 both, worst, worst_idx, false_feasible);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"URLLC-OFDMA resource allocation simulator"};
    app.require_subcommand(1);

    CommonFlags power_flags, users_flags;
    auto* power = app.add_subcommand("sweep-power", "Sweep the maximum transmit power");
    add_common(power, power_flags);
    auto* users = app.add_subcommand("sweep-users", "Sweep the number of users");
    add_common(users, users_flags);

    SolveOneFlags one;
    auto* solve_one = app.add_subcommand("solve-one", "Solve one instance and print the report");
    add_common(solve_one, one.common);
    solve_one->add_option("--instance", one.instance, "Instance JSON; otherwise one is generated");
    solve_one->add_option("--scheme", one.scheme, "Scheme to run");
    solve_one->add_option("--p-max-dbm", one.p_max_dbm, "P_max of the generated instance");
    solve_one->add_option("--users", one.users, "Number of users of the generated instance");
    solve_one->add_option("--realization", one.realization, "Realization index")
        ->check(CLI::NonNegativeNumber);
    solve_one->add_option("--dump-subproblem", one.dump,
                          "Write the first convex subproblem in text form");
    solve_one->add_option("--save-instance", one.save_instance, "Write the instance as JSON");

    OracleFlags orc;
    auto* oracle = app.add_subcommand("oracle-check", "Compare the proposed scheme to the oracle");
    oracle->add_option("--instances", orc.instances, "Number of random instances");
    oracle->add_option("--seed", orc.seed, "Master seed");
    oracle->add_option("--users", orc.users, "K");
    oracle->add_option("--subcarriers", orc.subcarriers, "M");
    oracle->add_option("--slots", orc.slots, "N");
    oracle->add_option("--p-max-dbm", orc.p_max_dbm, "P_max in dBm");
    oracle->add_option("--bits", orc.bits, "Bits required per user");
    oracle->add_option("--error-prob", orc.error_prob, "Target error probability");
    oracle->add_option("--grid", orc.grid, "Oracle power grid points");

    CLI11_PARSE(app, argc, argv);

    try {
        if (power->parsed()) return run_sweep(power_flags, SweepAxis::p_max_dbm);
        if (users->parsed()) return run_sweep(users_flags, SweepAxis::num_users);
        if (solve_one->parsed()) return run_solve_one(one);
        if (oracle->parsed()) return run_oracle_check(orc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
