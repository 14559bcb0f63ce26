// SPDX-License-Identifier: Apache-2.0

#include "urllc/instance_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace urllc {

using nlohmann::json;

std::string instance_to_json(const ProblemInstance& inst, int indent) {
    const Dims d = inst.dims();
    json j;
    j["num_users"] = d.users;
    j["num_subcarriers"] = d.subcarriers;
    j["num_slots"] = d.slots;
    j["p_max_dbm"] = inst.p_max_dbm();
    j["noise_power_dbm"] = inst.noise_power_dbm();
    json gains = json::array();
    for (int k = 0; k < d.users; ++k) {
        json row = json::array();
        for (int m = 0; m < d.subcarriers; ++m) row.push_back(inst.gain(k, m));
        gains.push_back(std::move(row));
    }
    j["gains"] = std::move(gains);
    json qos = json::array();
    for (const auto& q : inst.qos()) {
        qos.push_back({{"bits_required", q.bits_required},
                       {"error_prob", q.error_prob},
                       {"delay_slots", q.delay_slots},
                       {"weight", q.weight}});
    }
    j["qos"] = std::move(qos);
    j["seed"] = inst.seed();
    return j.dump(indent);
}

ProblemInstance instance_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        Dims d{j.at("num_users").get<int>(), j.at("num_subcarriers").get<int>(),
               j.at("num_slots").get<int>()};
        std::vector<double> gains;
        const auto& rows = j.at("gains");
        if (!rows.is_array() || rows.size() != static_cast<std::size_t>(d.users)) {
            throw std::invalid_argument("gains must have one row per user");
        }
        for (const auto& row : rows) {
            if (row.size() != static_cast<std::size_t>(d.subcarriers)) {
                throw std::invalid_argument("gain rows must have one entry per subcarrier");
            }
            for (const auto& g : row) gains.push_back(g.get<double>());
        }
        std::vector<QoSProfile> qos;
        for (const auto& q : j.at("qos")) {
            QoSProfile p;
            p.bits_required = q.at("bits_required").get<double>();
            p.error_prob = q.at("error_prob").get<double>();
            p.delay_slots = q.at("delay_slots").get<int>();
            p.weight = q.value("weight", 1.0);
            qos.push_back(p);
        }
        return ProblemInstance(d, j.at("p_max_dbm").get<double>(),
                               j.at("noise_power_dbm").get<double>(), std::move(gains),
                               std::move(qos), j.value("seed", std::uint64_t{0}));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed instance JSON: ") + e.what());
    }
}

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << instance_to_json(inst) << '\n';
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

ProblemInstance load_instance(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return instance_from_json(ss.str());
}

namespace {

json grid_json(const Grid3& g) {
    const Dims d = g.dims();
    json out = json::array();
    for (int k = 0; k < d.users; ++k) {
        json user = json::array();
        for (int m = 0; m < d.subcarriers; ++m) {
            json sc = json::array();
            for (int n = 0; n < d.slots; ++n) sc.push_back(g(k, m, n));
            user.push_back(std::move(sc));
        }
        out.push_back(std::move(user));
    }
    return out;
}

}  // namespace

std::string report_to_json(const SolveReport& rep, int indent) {
    json j;
    j["scheme"] = rep.scheme;
    j["feasible"] = rep.feasible;
    j["status"] = rep.status;
    j["metric"] = rep.metric;
    j["objective_trace"] = rep.objective_trace;
    j["iterations_used"] = rep.iterations_used;
    j["relaxation_gap"] = rep.relaxation_gap;
    j["user_bits"] = rep.user_bits;
    j["newton_steps"] = rep.newton_steps;
    j["wall_time_s"] = rep.wall_time_s;
    j["assignment"] = grid_json(rep.final_alloc.s);
    j["power"] = grid_json(rep.final_alloc.p);
    return j.dump(indent);
}

}  // namespace urllc
