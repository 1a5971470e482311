#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace trapsim {

// All simulation time is integer microseconds.
using MicrosTime = std::int64_t;

constexpr double kMinOokFreqHz = 1'000.0;
constexpr double kMaxOokFreqHz = 40'000.0;

// Quantized energy status carried by a burst. Ordering matters:
// Charging < Low < High < Full.
enum class EnergyLevel : int {
    Charging = 0,  // 32 pulses
    Low = 1,       // 64 pulses
    High = 2,      // 128 pulses
    Full = 3,      // 256 pulses
};

constexpr int nominal_pulses(EnergyLevel level) {
    switch (level) {
        case EnergyLevel::Charging: return 32;
        case EnergyLevel::Low: return 64;
        case EnergyLevel::High: return 128;
        case EnergyLevel::Full: return 256;
    }
    return 0;
}

const char* to_string(EnergyLevel level);

struct NodeId {
    int id = 0;
    double assigned_freq_hz = 0.0;
};

struct Burst {
    EnergyLevel level = EnergyLevel::Charging;
    double ook_freq_hz = 0.0;
    int node = 0;
};

// A demodulated OOK burst as the MCU sees it: edge timestamps in
// microseconds, strictly increasing, alternating polarity starting with
// a rising edge. Even edge count (every pulse is closed).
struct PulseTrain {
    std::vector<MicrosTime> edges;
    MicrosTime origin_time = 0;

    bool empty() const { return edges.empty(); }
    std::size_t pulse_count() const { return edges.size() / 2; }
    bool valid() const;

    MicrosTime rising(std::size_t i) const { return edges[2 * i]; }
    MicrosTime falling(std::size_t i) const { return edges[2 * i + 1]; }
};

struct InvalidFrequency : std::invalid_argument {
    explicit InvalidFrequency(double hz)
        : std::invalid_argument("OOK frequency out of band: " + std::to_string(hz) + " Hz") {}
};

struct TooFewPulses : std::runtime_error {
    TooFewPulses() : std::runtime_error("frequency estimation needs at least 4 pulses") {}
};

struct NoBurst : std::runtime_error {
    NoBurst() : std::runtime_error("cannot classify an empty burst") {}
};

}  // namespace trapsim
