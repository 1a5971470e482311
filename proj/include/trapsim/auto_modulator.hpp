#pragma once

#include "trapsim/channel_model.hpp"
#include "trapsim/types.hpp"

namespace trapsim {

// The MCU-free status circuit: quantizes stored energy against fixed
// thresholds and fires a burst every repetition period, power failures
// notwithstanding.
struct AutoModConfig {
    double t1 = 0.30;  // Charging/Low boundary, also the MCU boot threshold
    double t2 = 0.70;  // Low/High boundary, aligned with the data RX cost
    double t3 = 0.99;  // High/Full boundary
    double period_ms = 100.0;
    double drift_ppm = 0.0;
    double phase_offset_ms = 0.0;
};

EnergyLevel quantize(double energy_fraction, const AutoModConfig& cfg);

// last_fire + period * (1 + drift), rounded to the microsecond quantum.
MicrosTime next_fire_time(MicrosTime last_fire, const AutoModConfig& cfg);

MicrosTime first_fire_time(const AutoModConfig& cfg);

// Emission happens whether or not the node MCU is powered.
ChannelEvent emit(const NodeId& node, double energy_fraction, const AutoModConfig& cfg,
                  MicrosTime now);

}  // namespace trapsim
