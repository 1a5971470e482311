#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "trapsim/scenario.hpp"

namespace trapsim {

enum class EventKind : int {
    HarvestTick = 0,
    AutoModFire = 1,
    BurstArrival = 2,
    DecodeComplete = 3,
    TxDecision = 4,
    DataTxStart = 5,
    DataTxEnd = 6,
    PowerFail = 7,
    Boot = 8,
};

const char* to_string(EventKind kind);

struct TraceRow {
    MicrosTime time_us = 0;
    EventKind kind = EventKind::HarvestTick;
    int node = 0;
    std::string payload;  // semicolon-separated key=value pairs
};

using Trace = std::vector<TraceRow>;

void write_trace_csv(const Trace& trace, std::ostream& out);

// Receiver listening power while the backscatter RX chain is enabled,
// tracked as an informational metric only (never deducted from storage).
constexpr double kListeningPowerUw = 36.2;

struct Metrics {
    int tx_actions = 0;
    int successful_receptions = 0;
    double success_rate = 0.0;
    double throughput_per_min = 0.0;
    std::map<std::string, int> failure_breakdown;
    double listening_time_s = 0.0;
    double listening_energy_uj = 0.0;

    // informational counters
    std::map<std::string, int> postpone_breakdown;
    int decoded_bursts = 0;
    int corrupted_bursts = 0;
    int overlap_events = 0;
    int engage_from_overlap = 0;
    int csma_aborts = 0;
    int power_failures = 0;
    double simulated_minutes = 0.0;
};

nlohmann::json to_json(const Metrics& metrics);

struct ResolvedNodeParams {
    int id = 0;
    double drift_ppm = 0.0;
    double phase_offset_ms = 0.0;
};

struct RunResult {
    Trace trace;
    Metrics metrics;
    std::vector<ResolvedNodeParams> resolved_nodes;
};

// Per-node drift and phase as the engine will use them (sampled from the
// seed where the scenario leaves them open).
std::vector<ResolvedNodeParams> resolve_node_params(const Scenario& scenario, std::uint64_t seed);

// Deterministic: identical (scenario, seed) gives bit-identical results.
RunResult run(const Scenario& scenario, std::uint64_t seed);

struct PairedResult {
    Metrics trap;
    Metrics baseline;
};

// Both arms share the harvest random stream (common random numbers).
PairedResult run_paired(const Scenario& scenario, std::uint64_t seed);

// One sweep axis: a JSON pointer into the scenario document and the
// values it takes. Cells are the cartesian product of all axes.
struct SweepAxis {
    std::string pointer;
    std::vector<nlohmann::json> values;
};

nlohmann::json sweep(const nlohmann::json& scenario_template, const std::vector<SweepAxis>& axes,
                     const std::vector<std::uint64_t>& seeds);

}  // namespace trapsim
