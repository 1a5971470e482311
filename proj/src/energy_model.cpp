#include "trapsim/energy_model.hpp"

#include <algorithm>

namespace trapsim {

double draw_harvest_increment(const HarvestParams& params, std::mt19937_64& rng) {
    const double scale = params.interval_s / 60.0;
    std::normal_distribution<double> dist(params.mean_per_min * scale, params.std_per_min * scale);
    return std::max(0.0, dist(rng));
}

CapacitorState harvest_step(CapacitorState state, const HarvestParams& params,
                            double boot_threshold, std::mt19937_64& rng, MicrosTime now) {
    state.energy_fraction = std::min(1.0, state.energy_fraction + draw_harvest_increment(params, rng));
    if (!state.mcu_on && state.energy_fraction >= boot_threshold) state.mcu_on = true;
    state.last_update = now;
    return state;
}

std::optional<CapacitorState> consume(const CapacitorState& state, double cost) {
    if (state.energy_fraction < cost) return std::nullopt;
    CapacitorState next = state;
    next.energy_fraction -= cost;
    if (next.energy_fraction <= 0.0) {
        next.energy_fraction = 0.0;
        next.mcu_on = false;  // power failure clears MCU state
    }
    return next;
}

}  // namespace trapsim
