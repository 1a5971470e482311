#pragma once

#include <optional>
#include <random>

#include "trapsim/types.hpp"

namespace trapsim {

struct CapacitorState {
    double energy_fraction = 0.0;  // fraction of full storage, in [0, 1]
    bool mcu_on = false;
    MicrosTime last_update = 0;
};

struct HarvestParams {
    double mean_per_min = 0.25;  // fraction of storage per minute
    double std_per_min = 0.22;
    double interval_s = 60.0;  // tick spacing
};

struct TaskCosts {
    double tx_cost = 1.00;
    double rx_cost = 0.70;
};

// One harvest increment: Normal(mean, std) scaled to the tick interval,
// censored at zero (harvesters never drain storage).
double draw_harvest_increment(const HarvestParams& params, std::mt19937_64& rng);

// Apply one tick. boot_threshold is the energy at which a dead MCU
// powers back up.
CapacitorState harvest_step(CapacitorState state, const HarvestParams& params,
                            double boot_threshold, std::mt19937_64& rng, MicrosTime now);

// Atomic consume: returns the new state, or nullopt (InsufficientEnergy)
// leaving the caller's state untouched. Draining to zero is a power
// failure and turns the MCU off.
std::optional<CapacitorState> consume(const CapacitorState& state, double cost);

}  // namespace trapsim
