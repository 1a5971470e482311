#include "trapsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace trapsim {

using nlohmann::json;

ProtocolMode parse_mode(const std::string& name) {
    if (name == "trap") return ProtocolMode::Trap;
    if (name == "baseline") return ProtocolMode::Baseline;
    if (name == "csma") return ProtocolMode::TrapWithCsma;
    throw ValidationError("unknown protocol mode: " + name);
}

namespace {

PiecewiseLinear curve_from_json(const json& arr) {
    PiecewiseLinear curve;
    for (const auto& point : arr) {
        curve.points.emplace_back(point.at(0).get<double>(), point.at(1).get<double>());
    }
    return curve;
}

json curve_to_json(const PiecewiseLinear& curve) {
    json arr = json::array();
    for (const auto& [f, v] : curve.points) arr.push_back({f, v});
    return arr;
}

NodeSpec node_from_json(const json& doc) {
    NodeSpec node;
    node.id = doc.at("id").get<int>();
    node.freq_hz = doc.at("freq_hz").get<double>();
    node.initial_energy = doc.value("initial_energy", 0.0);
    if (doc.contains("automod")) {
        const json& am = doc.at("automod");
        if (am.contains("thresholds")) {
            const json& t = am.at("thresholds");
            for (int i = 0; i < 3; ++i) node.thresholds[i] = t.at(i).get<double>();
        }
        node.period_ms = am.value("period_ms", node.period_ms);
        if (am.contains("drift_ppm") && !am.at("drift_ppm").is_null()) {
            node.drift_ppm = am.at("drift_ppm").get<double>();
        }
        node.drift_max_ppm = am.value("drift_max_ppm", node.drift_max_ppm);
        if (am.contains("phase_offset_ms") && !am.at("phase_offset_ms").is_null()) {
            node.phase_offset_ms = am.at("phase_offset_ms").get<double>();
        }
    }
    if (doc.contains("harvest")) {
        const json& h = doc.at("harvest");
        node.harvest.mean_per_min = h.value("mean_per_min", node.harvest.mean_per_min);
        node.harvest.std_per_min = h.value("std_per_min", node.harvest.std_per_min);
        node.harvest.interval_s = h.value("interval_s", node.harvest.interval_s);
    }
    return node;
}

json node_to_json(const NodeSpec& node) {
    json am{{"thresholds", {node.thresholds[0], node.thresholds[1], node.thresholds[2]}},
            {"period_ms", node.period_ms},
            {"drift_max_ppm", node.drift_max_ppm}};
    if (node.drift_ppm) am["drift_ppm"] = *node.drift_ppm;
    if (node.phase_offset_ms) am["phase_offset_ms"] = *node.phase_offset_ms;
    return json{{"id", node.id},
                {"freq_hz", node.freq_hz},
                {"initial_energy", node.initial_energy},
                {"automod", am},
                {"harvest",
                 {{"mean_per_min", node.harvest.mean_per_min},
                  {"std_per_min", node.harvest.std_per_min},
                  {"interval_s", node.harvest.interval_s}}}};
}

}  // namespace

Scenario parse_scenario(const json& doc) {
    Scenario scenario;
    try {
        scenario.duration_s = doc.at("duration_s").get<double>();
        scenario.mode = parse_mode(doc.value("mode", "trap"));
        scenario.data_tx_duration_ms = doc.value("data_tx_duration_ms", 10.0);
        if (doc.contains("backoff_ms")) {
            scenario.backoff_min_ms = doc.at("backoff_ms").at(0).get<double>();
            scenario.backoff_max_ms = doc.at("backoff_ms").at(1).get<double>();
        }
        scenario.freq_slot_spacing_hz = doc.value("freq_slot_spacing_hz", 2'000.0);
        if (doc.contains("freq_band_hz")) {
            scenario.freq_band_lo_hz = doc.at("freq_band_hz").at(0).get<double>();
            scenario.freq_band_hi_hz = doc.at("freq_band_hz").at(1).get<double>();
        }
        if (doc.contains("costs")) {
            scenario.costs.tx_cost = doc.at("costs").value("tx", 1.0);
            scenario.costs.rx_cost = doc.at("costs").value("rx", 0.7);
        }
        scenario.channel = calibrate_defaults();
        if (doc.contains("channel")) {
            const json& ch = doc.at("channel");
            if (ch.contains("settling_loss")) scenario.channel.settling_loss = curve_from_json(ch.at("settling_loss"));
            if (ch.contains("drop_prob")) scenario.channel.drop_prob = curve_from_json(ch.at("drop_prob"));
            if (ch.contains("spurious_rate")) scenario.channel.spurious_rate = curve_from_json(ch.at("spurious_rate"));
        }
        for (const auto& n : doc.value("nodes", json::array())) {
            scenario.nodes.push_back(node_from_json(n));
        }
        for (const auto& t : doc.value("traffic", json::array())) {
            scenario.traffic.push_back({t.at("sender").get<int>(), t.at("receiver").get<int>()});
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario parse error: ") + e.what());
    }
    validate(scenario);
    return scenario;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario parse error in ") + path + ": " + e.what());
    }
    return parse_scenario(doc);
}

void validate(const Scenario& scenario) {
    if (scenario.duration_s < 0) throw ValidationError("duration_s must be non-negative");
    if (scenario.nodes.empty()) throw ValidationError("nodes list is empty");
    if (scenario.costs.rx_cost <= 0 || scenario.costs.rx_cost > scenario.costs.tx_cost ||
        scenario.costs.tx_cost > 1.0) {
        throw ValidationError("costs must satisfy 0 < rx <= tx <= 1");
    }
    if (scenario.mode == ProtocolMode::TrapWithCsma &&
        scenario.backoff_max_ms < scenario.backoff_min_ms) {
        throw ValidationError("backoff range is empty");
    }
    std::set<int> ids;
    for (const NodeSpec& node : scenario.nodes) {
        if (!ids.insert(node.id).second) {
            throw ValidationError("duplicate node id " + std::to_string(node.id));
        }
        if (node.freq_hz < scenario.freq_band_lo_hz || node.freq_hz > scenario.freq_band_hi_hz) {
            throw ValidationError("node " + std::to_string(node.id) + " frequency outside band");
        }
        if (!(node.thresholds[0] > 0 && node.thresholds[0] < node.thresholds[1] &&
              node.thresholds[1] < node.thresholds[2] && node.thresholds[2] <= 1.0)) {
            throw ValidationError("node " + std::to_string(node.id) + " thresholds not ascending in (0,1]");
        }
        const double max_burst_ms = nominal_pulses(EnergyLevel::Full) * 1e3 / node.freq_hz;
        if (node.period_ms <= max_burst_ms) {
            throw ValidationError("node " + std::to_string(node.id) + " period shorter than max burst");
        }
        if (node.harvest.mean_per_min < 0 || node.harvest.std_per_min < 0 ||
            node.harvest.interval_s <= 0) {
            throw ValidationError("node " + std::to_string(node.id) + " harvest parameters invalid");
        }
        if (node.initial_energy < 0 || node.initial_energy > 1) {
            throw ValidationError("node " + std::to_string(node.id) + " initial energy outside [0,1]");
        }
    }
    for (std::size_t i = 0; i < scenario.nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < scenario.nodes.size(); ++j) {
            const double gap = std::abs(scenario.nodes[i].freq_hz - scenario.nodes[j].freq_hz);
            if (gap < scenario.freq_slot_spacing_hz) {
                throw ValidationError("frequency slots of nodes " + std::to_string(scenario.nodes[i].id) +
                                      " and " + std::to_string(scenario.nodes[j].id) +
                                      " closer than slot spacing");
            }
        }
    }
    for (const TrafficSpec& t : scenario.traffic) {
        if (!ids.count(t.sender) || !ids.count(t.receiver)) {
            throw ValidationError("traffic references undeclared node");
        }
        if (t.sender == t.receiver) throw ValidationError("traffic sender equals receiver");
    }
}

json to_json(const Scenario& scenario) {
    json nodes = json::array();
    for (const NodeSpec& node : scenario.nodes) nodes.push_back(node_to_json(node));
    json traffic = json::array();
    for (const TrafficSpec& t : scenario.traffic) {
        traffic.push_back({{"sender", t.sender}, {"receiver", t.receiver}});
    }
    return json{{"duration_s", scenario.duration_s},
                {"mode", to_string(scenario.mode)},
                {"data_tx_duration_ms", scenario.data_tx_duration_ms},
                {"backoff_ms", {scenario.backoff_min_ms, scenario.backoff_max_ms}},
                {"freq_slot_spacing_hz", scenario.freq_slot_spacing_hz},
                {"freq_band_hz", {scenario.freq_band_lo_hz, scenario.freq_band_hi_hz}},
                {"costs", {{"tx", scenario.costs.tx_cost}, {"rx", scenario.costs.rx_cost}}},
                {"channel",
                 {{"settling_loss", curve_to_json(scenario.channel.settling_loss)},
                  {"drop_prob", curve_to_json(scenario.channel.drop_prob)},
                  {"spurious_rate", curve_to_json(scenario.channel.spurious_rate)}}},
                {"nodes", nodes},
                {"traffic", traffic}};
}

}  // namespace trapsim
