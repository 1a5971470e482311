#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trapsim/auto_modulator.hpp"
#include "trapsim/channel_model.hpp"
#include "trapsim/energy_model.hpp"
#include "trapsim/trap_protocol.hpp"

namespace trapsim {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NodeSpec {
    int id = 0;
    double freq_hz = 0.0;
    double initial_energy = 0.0;
    double thresholds[3] = {0.30, 0.70, 0.99};
    double period_ms = 100.0;
    std::optional<double> drift_ppm;        // absent: sampled uniformly in +-drift_max_ppm
    double drift_max_ppm = 500.0;
    std::optional<double> phase_offset_ms;  // absent: sampled uniformly in [0, period)
    HarvestParams harvest;
};

struct TrafficSpec {
    int sender = 0;
    int receiver = 0;
};

struct Scenario {
    double duration_s = 0.0;
    ProtocolMode mode = ProtocolMode::Trap;
    double data_tx_duration_ms = 10.0;
    double backoff_min_ms = 0.0;
    double backoff_max_ms = 10.0;
    double freq_slot_spacing_hz = 2'000.0;
    double freq_band_lo_hz = 12'000.0;
    double freq_band_hi_hz = 40'000.0;
    TaskCosts costs;
    ChannelParams channel;
    std::vector<NodeSpec> nodes;
    std::vector<TrafficSpec> traffic;
};

// Throws ParseError on malformed input, ValidationError on a violated
// invariant (duplicate ids, slot spacing, threshold order, ...).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const nlohmann::json& doc);
void validate(const Scenario& scenario);

nlohmann::json to_json(const Scenario& scenario);

ProtocolMode parse_mode(const std::string& name);

}  // namespace trapsim
