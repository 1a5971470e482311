#include "trapsim/auto_modulator.hpp"

#include <cmath>

#include "trapsim/burst_codec.hpp"

namespace trapsim {

EnergyLevel quantize(double energy_fraction, const AutoModConfig& cfg) {
    if (energy_fraction < cfg.t1) return EnergyLevel::Charging;
    if (energy_fraction < cfg.t2) return EnergyLevel::Low;
    if (energy_fraction < cfg.t3) return EnergyLevel::High;
    return EnergyLevel::Full;
}

MicrosTime next_fire_time(MicrosTime last_fire, const AutoModConfig& cfg) {
    return last_fire + std::llround(cfg.period_ms * 1'000.0 * (1.0 + cfg.drift_ppm * 1e-6));
}

MicrosTime first_fire_time(const AutoModConfig& cfg) {
    return std::llround(cfg.phase_offset_ms * 1'000.0);
}

ChannelEvent emit(const NodeId& node, double energy_fraction, const AutoModConfig& cfg,
                  MicrosTime now) {
    const EnergyLevel level = quantize(energy_fraction, cfg);
    ChannelEvent event;
    event.tx_node = node;
    event.train = encode(level, node.assigned_freq_hz, now);
    event.start = now;
    event.end = now + burst_duration_us(level, node.assigned_freq_hz);
    return event;
}

}  // namespace trapsim
