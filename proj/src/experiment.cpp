// SPDX-License-Identifier: Apache-2.0

#include "urllc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace urllc {

using nlohmann::json;

std::string_view axis_name(SweepAxis axis) {
    return axis == SweepAxis::p_max_dbm ? "p_max_dbm" : "num_users";
}

SweepAxis parse_axis(std::string_view name) {
    if (name == "p_max_dbm") return SweepAxis::p_max_dbm;
    if (name == "num_users") return SweepAxis::num_users;
    throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "'");
}

Preset parse_preset(std::string_view name) {
    if (name == "desk") return Preset::desk;
    if (name == "paper") return Preset::paper;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

int ExperimentSpec::max_users() const {
    if (axis == SweepAxis::p_max_dbm) return num_users;
    int k = 0;
    for (double v : sweep_values) k = std::max(k, static_cast<int>(v));
    return k;
}

void ExperimentSpec::validate() const {
    if (sweep_values.empty()) throw std::invalid_argument("sweep has no values");
    if (schemes.empty()) throw std::invalid_argument("scheme list is empty");
    if (realizations < 1) throw std::invalid_argument("realizations must be at least 1");
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
    if (num_subcarriers < 1 || num_slots < 1) {
        throw std::invalid_argument("num_subcarriers and num_slots must be positive");
    }
    std::set<SchemeId> seen;
    for (auto id : schemes) {
        if (!seen.insert(id).second) {
            throw std::invalid_argument("scheme listed twice: " + std::string(scheme_name(id)));
        }
    }
    for (double v : sweep_values) {
        if (!std::isfinite(v)) throw std::invalid_argument("sweep values must be finite");
        if (axis == SweepAxis::num_users && (v < 1.0 || v != std::floor(v))) {
            throw std::invalid_argument("user counts must be positive integers");
        }
    }
    if (axis == SweepAxis::p_max_dbm && num_users < 1) {
        throw std::invalid_argument("num_users must be positive");
    }
    if (static_cast<int>(qos.size()) < max_users()) {
        throw std::invalid_argument("QoS template has " + std::to_string(qos.size()) +
                                    " entries but the sweep needs " +
                                    std::to_string(max_users()));
    }
    for (const auto& q : qos) {
        if (q.delay_slots < 1 || q.delay_slots > num_slots) {
            throw std::invalid_argument("delay_slots must lie in [1, num_slots]");
        }
        if (!(q.error_prob > 0.0 && q.error_prob <= 0.5)) {
            throw std::invalid_argument("error_prob must lie in (0, 0.5]");
        }
        if (!(q.bits_required >= 0.0) || !(q.weight > 0.0)) {
            throw std::invalid_argument("bits_required must be >= 0 and weight > 0");
        }
    }
    solver.validate();
    if (std::find(schemes.begin(), schemes.end(), SchemeId::oracle) != schemes.end()) {
        // Assignments the oracle would enumerate at the largest K.
        double count = 1.0;
        for (int n = 0; n < num_slots; ++n) {
            int allowed = 0;
            for (int k = 0; k < max_users(); ++k) allowed += qos[k].delay_slots > n ? 1 : 0;
            count *= std::pow(1.0 + allowed, num_subcarriers);
        }
        if (count > static_cast<double>(oracle.max_assignments)) {
            throw std::invalid_argument(
                "oracle scheme requested on an instance too large to enumerate");
        }
    }
}

ExperimentSpec preset_spec(Preset preset, SweepAxis axis) {
    ExperimentSpec s;
    s.axis = axis;
    s.schemes = {SchemeId::proposed, SchemeId::upper_bound, SchemeId::benchmark1,
                 SchemeId::benchmark2};
    s.seed = 1;
    const bool paper = preset == Preset::paper;
    s.num_subcarriers = paper ? 64 : 16;
    s.realizations = paper ? 100 : 50;
    if (axis == SweepAxis::p_max_dbm) {
        s.num_slots = 6;
        s.num_users = 4;
        const double eps = 1e-7;
        s.qos = {{160.0, eps, 2, 1.0}, {160.0, eps, 3, 1.0}, {160.0, eps, 6, 1.0},
                 {160.0, eps, 6, 1.0}};
        for (int i = 0; i <= 10; ++i) s.sweep_values.push_back(20.0 + 2.5 * i);
        s.out_stem = "sweep_power";
    } else {
        s.num_slots = 4;
        s.p_max_dbm = 45.0;
        const double eps = 1e-6;
        s.qos.assign(6, QoSProfile{160.0, eps, 4, 1.0});
        s.qos[0].delay_slots = 2;
        s.sweep_values = {2, 3, 4, 5, 6};
        s.out_stem = "sweep_users";
    }
    if (paper) {
        s.num_slots = 6;
        if (axis == SweepAxis::num_users) {
            for (auto& q : s.qos) q.delay_slots = std::min(q.delay_slots, s.num_slots);
        }
    }
    return s;
}

namespace {

QoSProfile qos_from_json(const json& j, QoSProfile q) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& key = it.key();
        if (key == "bits_required") q.bits_required = it->get<double>();
        else if (key == "error_prob") q.error_prob = it->get<double>();
        else if (key == "delay_slots") q.delay_slots = it->get<int>();
        else if (key == "weight") q.weight = it->get<double>();
        else throw std::invalid_argument("unknown qos key '" + key + "'");
    }
    return q;
}

void solver_from_json(const json& j, SolverConfig& c) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& key = it.key();
        if (key == "beta") {
            if (it->is_null()) c.beta.reset();
            else c.beta = it->get<double>();
        } else if (key == "j_max") {
            c.j_max = it->get<int>();
        } else if (key == "rel_obj_tol") {
            c.rel_obj_tol = it->get<double>();
        } else if (key == "rounding") {
            const auto name = it->get<std::string>();
            if (name == "threshold") c.rounding = RoundingRule::threshold;
            else if (name == "argmax_repair") c.rounding = RoundingRule::argmax_repair;
            else throw std::invalid_argument("unknown rounding rule '" + name + "'");
        } else if (key == "round_threshold") {
            c.round_threshold = it->get<double>();
        } else if (key == "restore") {
            c.restore = it->get<bool>();
        } else if (key == "audit_tol") {
            c.audit_tol = it->get<double>();
        } else if (key == "gap_tol") {
            c.inner.gap_tol = it->get<double>();
        } else if (key == "max_newton_steps") {
            c.inner.max_newton_steps = it->get<int>();
        } else {
            throw std::invalid_argument("unknown solver key '" + key + "'");
        }
    }
}

}  // namespace

ExperimentSpec spec_from_json(const std::string& text, ExperimentSpec s) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& key = it.key();
            const json& v = *it;
            if (key == "sweep") {
                for (auto jt = v.begin(); jt != v.end(); ++jt) {
                    if (jt.key() == "axis") s.axis = parse_axis(jt->get<std::string>());
                    else if (jt.key() == "values") s.sweep_values = jt->get<std::vector<double>>();
                    else throw std::invalid_argument("unknown sweep key '" + jt.key() + "'");
                }
            } else if (key == "num_subcarriers") {
                s.num_subcarriers = v.get<int>();
            } else if (key == "num_slots") {
                s.num_slots = v.get<int>();
            } else if (key == "num_users") {
                s.num_users = v.get<int>();
            } else if (key == "p_max_dbm") {
                s.p_max_dbm = v.get<double>();
            } else if (key == "qos") {
                // A list replaces the template; an object overrides every entry.
                if (v.is_array()) {
                    std::vector<QoSProfile> q;
                    for (const auto& e : v) q.push_back(qos_from_json(e, QoSProfile{}));
                    s.qos = std::move(q);
                } else {
                    for (auto& q : s.qos) q = qos_from_json(v, q);
                }
            } else if (key == "channel") {
                for (auto jt = v.begin(); jt != v.end(); ++jt) {
                    const auto& ck = jt.key();
                    if (ck == "cell_radius_m") s.channel.cell_radius_m = jt->get<double>();
                    else if (ck == "user_distances_m")
                        s.channel.user_distances_m = jt->get<std::vector<double>>();
                    else if (ck == "noise_density_dbm_hz")
                        s.channel.noise_density_dbm_hz = jt->get<double>();
                    else if (ck == "subcarrier_bandwidth_hz")
                        s.channel.subcarrier_bandwidth_hz = jt->get<double>();
                    else throw std::invalid_argument("unknown channel key '" + ck + "'");
                }
            } else if (key == "realizations") {
                s.realizations = v.get<int>();
            } else if (key == "schemes") {
                s.schemes.clear();
                for (const auto& name : v) s.schemes.push_back(parse_scheme(name.get<std::string>()));
            } else if (key == "seed") {
                s.seed = v.get<std::uint64_t>();
            } else if (key == "workers") {
                s.workers = v.get<int>();
            } else if (key == "timing") {
                s.timing = v.get<bool>();
            } else if (key == "solver") {
                solver_from_json(v, s.solver);
            } else if (key == "oracle") {
                for (auto jt = v.begin(); jt != v.end(); ++jt) {
                    if (jt.key() == "grid") s.oracle.grid = jt->get<int>();
                    else if (jt.key() == "refinements") s.oracle.refinements = jt->get<int>();
                    else if (jt.key() == "max_assignments")
                        s.oracle.max_assignments = jt->get<std::size_t>();
                    else throw std::invalid_argument("unknown oracle key '" + jt.key() + "'");
                }
            } else if (key == "output") {
                for (auto jt = v.begin(); jt != v.end(); ++jt) {
                    if (jt.key() == "dir") s.out_dir = jt->get<std::string>();
                    else if (jt.key() == "stem") s.out_stem = jt->get<std::string>();
                    else throw std::invalid_argument("unknown output key '" + jt.key() + "'");
                }
            } else {
                throw std::invalid_argument("unknown config key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config has a value of the wrong type: ") +
                                    e.what());
    }
    return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path, ExperimentSpec base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return spec_from_json(ss.str(), std::move(base));
}

std::uint64_t realization_seed(std::uint64_t master, int r) {
    return mix_seed(master, static_cast<std::uint64_t>(r));
}

ProblemInstance make_instance(const ExperimentSpec& spec, double sweep_value, int r) {
    ChannelGenSpec ch = spec.channel;
    ch.rng_seed = realization_seed(spec.seed, r);
    int k = spec.num_users;
    double p = spec.p_max_dbm;
    if (spec.axis == SweepAxis::p_max_dbm) p = sweep_value;
    else k = static_cast<int>(sweep_value);
    const std::vector<QoSProfile> qos(spec.qos.begin(), spec.qos.begin() + k);
    return generate_instance(ch, Dims{k, spec.num_subcarriers, spec.num_slots}, p, qos);
}

void CellResult::summarize() {
    const auto n = metrics.size();
    mean = 0.0;
    std_error = 0.0;
    infeasible_fraction = 0.0;
    if (n == 0) return;
    mean = std::accumulate(metrics.begin(), metrics.end(), 0.0) / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double v : metrics) ss += (v - mean) * (v - mean);
        std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }
    const auto bad = std::count(feasible.begin(), feasible.end(), false);
    infeasible_fraction = static_cast<double>(bad) / static_cast<double>(n);
}

const CellResult* ResultTable::find(double sweep_value, SchemeId scheme) const {
    for (const auto& c : cells) {
        if (c.sweep_value == sweep_value && c.scheme == scheme) return &c;
    }
    return nullptr;
}

bool ResultTable::operator==(const ResultTable& o) const {
    if (axis != o.axis || cells.size() != o.cells.size()) return false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& a = cells[i];
        const auto& b = o.cells[i];
        if (a.sweep_value != b.sweep_value || a.scheme != b.scheme || a.metrics != b.metrics ||
            a.feasible != b.feasible || a.mean != b.mean || a.std_error != b.std_error ||
            a.infeasible_fraction != b.infeasible_fraction || a.runtime_s != b.runtime_s) {
            return false;
        }
    }
    return true;
}

namespace {

struct Outcome {
    double metric = 0.0;
    bool feasible = false;
    double seconds = 0.0;
};

/// All requested schemes on one realization. Benchmark 1 reuses the
/// upper-bound solve when both are requested.
std::vector<Outcome> run_task(const ExperimentSpec& spec, const ProblemInstance& inst) {
    std::vector<Outcome> out(spec.schemes.size());
    SolveReport upper;
    bool have_upper = false;
    double upper_seconds = 0.0;
    auto upper_report = [&]() -> const SolveReport& {
        if (!have_upper) {
            upper = solve_upper_bound(inst, spec.solver);
            upper_seconds = upper.wall_time_s;
            have_upper = true;
        }
        return upper;
    };
    for (std::size_t i = 0; i < spec.schemes.size(); ++i) {
        SolveReport rep;
        switch (spec.schemes[i]) {
            case SchemeId::upper_bound:
                rep = upper_report();
                break;
            case SchemeId::benchmark1: {
                const auto t0 = std::chrono::steady_clock::now();
                rep = benchmark1_from_upper_bound(inst, upper_report(), spec.solver);
                rep.wall_time_s =
                    upper_seconds +
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                break;
            }
            case SchemeId::oracle:
                rep = oracle_solve(inst, spec.oracle, spec.solver.audit_tol);
                break;
            default:
                rep = solve_scheme(spec.schemes[i], inst, spec.solver);
        }
        out[i] = {rep.feasible ? rep.metric : 0.0, rep.feasible, rep.wall_time_s};
    }
    return out;
}

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const std::size_t points = spec.sweep_values.size();
    const std::size_t reps = static_cast<std::size_t>(spec.realizations);
    const std::size_t tasks = points * reps;
    std::vector<std::vector<Outcome>> results(tasks);

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&]() {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (error) return;
            }
            try {
                const auto inst = make_instance(spec, spec.sweep_values[t / reps],
                                                static_cast<int>(t % reps));
                results[t] = run_task(spec, inst);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const int n_threads = std::min<int>(spec.workers, static_cast<int>(tasks));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    ResultTable table;
    table.axis = spec.axis;
    for (std::size_t p = 0; p < points; ++p) {
        for (std::size_t i = 0; i < spec.schemes.size(); ++i) {
            CellResult cell;
            cell.sweep_value = spec.sweep_values[p];
            cell.scheme = spec.schemes[i];
            for (std::size_t r = 0; r < reps; ++r) {
                const auto& o = results[p * reps + r][i];
                cell.metrics.push_back(o.metric);
                cell.feasible.push_back(o.feasible);
                if (spec.timing) cell.runtime_s += o.seconds;
            }
            cell.summarize();
            table.cells.push_back(std::move(cell));
        }
    }
    return table;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void write_csv(const ResultTable& table, std::ostream& out) {
    out << "sweep_value,scheme,mean_throughput_bps_hz,stderr,infeasible_fraction,realizations,"
           "runtime_s\n";
    for (const auto& c : table.cells) {
        out << fmt(c.sweep_value) << ',' << scheme_name(c.scheme) << ',' << fmt(c.mean) << ','
            << fmt(c.std_error) << ',' << fmt(c.infeasible_fraction) << ',' << c.realizations()
            << ',' << fmt(c.runtime_s) << '\n';
    }
}

std::string table_to_json(const ResultTable& table, int indent) {
    json j;
    j["axis"] = axis_name(table.axis);
    json cells = json::array();
    for (const auto& c : table.cells) {
        json f = json::array();
        for (bool b : c.feasible) f.push_back(b);
        cells.push_back({{"sweep_value", c.sweep_value},
                         {"scheme", scheme_name(c.scheme)},
                         {"mean_throughput_bps_hz", c.mean},
                         {"stderr", c.std_error},
                         {"infeasible_fraction", c.infeasible_fraction},
                         {"realizations", c.realizations()},
                         {"runtime_s", c.runtime_s},
                         {"metrics", c.metrics},
                         {"feasible", std::move(f)}});
    }
    j["cells"] = std::move(cells);
    return j.dump(indent);
}

ResultTable table_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        ResultTable t;
        t.axis = parse_axis(j.at("axis").get<std::string>());
        for (const auto& e : j.at("cells")) {
            CellResult c;
            c.sweep_value = e.at("sweep_value").get<double>();
            c.scheme = parse_scheme(e.at("scheme").get<std::string>());
            c.metrics = e.at("metrics").get<std::vector<double>>();
            for (const auto& b : e.at("feasible")) c.feasible.push_back(b.get<bool>());
            if (c.feasible.size() != c.metrics.size()) {
                throw std::invalid_argument("metrics and feasible arrays differ in length");
            }
            c.runtime_s = e.at("runtime_s").get<double>();
            c.summarize();
            t.cells.push_back(std::move(c));
        }
        return t;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed result document: ") + e.what());
    }
}

void ensure_writable(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory " + dir.string() +
                                 (ec ? ": " + ec.message() : ""));
    }
    const auto probe = dir / ".urllc_write_probe";
    {
        std::ofstream f(probe);
        if (!f) throw std::runtime_error("output directory is not writable: " + dir.string());
    }
    std::filesystem::remove(probe, ec);
}

void emit_results(const ResultTable& table, const std::filesystem::path& dir,
                  const std::string& stem) {
    ensure_writable(dir);
    const auto csv_path = dir / (stem + ".csv");
    const auto json_path = dir / (stem + ".json");
    {
        std::ofstream f(csv_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + csv_path.string());
        write_csv(table, f);
        if (!f) throw std::runtime_error("write failed: " + csv_path.string());
    }
    {
        std::ofstream f(json_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + json_path.string());
        f << table_to_json(table) << '\n';
        if (!f) throw std::runtime_error("write failed: " + json_path.string());
    }
}

}  // namespace urllc
