#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>

#include "trapsim/burst_codec.hpp"
#include "trapsim/energy_model.hpp"
#include "trapsim/types.hpp"

namespace trapsim {

enum class ProtocolMode { Trap, Baseline, TrapWithCsma };

const char* to_string(ProtocolMode mode);

struct BackoffRange {
    MicrosTime min_us = 0;
    MicrosTime max_us = 0;
};

// Last known energy status per neighbor. An entry older than twice the
// neighbor's expected burst period is stale and never justifies an
// engage decision.
class NeighborTable {
public:
    struct Entry {
        EnergyLevel level = EnergyLevel::Charging;
        MicrosTime timestamp = 0;
        MicrosTime expected_period_us = 0;
    };

    void update(int node, EnergyLevel level, MicrosTime now, MicrosTime expected_period_us);
    const Entry* find(int node) const;
    bool is_stale(const Entry& entry, MicrosTime now) const;
    void clear() { entries_.clear(); }
    std::size_t size() const { return entries_.size(); }

private:
    std::map<int, Entry> entries_;
};

// A Corrupted decode leaves the table untouched; the status is omitted.
void on_burst_received(const std::optional<Decoded>& decoded, NeighborTable& table,
                       MicrosTime now, MicrosTime expected_period_us);

enum class PostponeReason { SelfLow, NeighborUnknown, NeighborLow, Stale };

const char* to_string(PostponeReason reason);

struct Decision {
    bool engage = false;
    PostponeReason reason = PostponeReason::SelfLow;
};

// Trap modes engage only on a fresh neighbor status of at least High;
// Baseline checks nothing beyond its own storage.
Decision decide_transmit(double self_energy, int target, const NeighborTable& table,
                         ProtocolMode mode, const TaskCosts& costs, MicrosTime now);

// Carrier sense: draw a back-off, abort if the data channel shows any
// activity during the back-off window. channel_active_during reports
// activity over [now, tx_time).
std::optional<MicrosTime> csma_schedule(
    const BackoffRange& range, std::mt19937_64& rng, MicrosTime now,
    const std::function<bool(MicrosTime, MicrosTime)>& channel_active_during);

enum class DeliveryFailure { ReceiverLow, Collision };

const char* to_string(DeliveryFailure reason);

struct DeliveryResult {
    bool success = false;
    DeliveryFailure failure = DeliveryFailure::ReceiverLow;
    CapacitorState sender;
    CapacitorState receiver;
};

// The sender pays tx_cost no matter what; the receiver pays rx_cost only
// on success. Precondition: sender energy covers tx_cost.
DeliveryResult execute_data_tx(const CapacitorState& sender, const CapacitorState& receiver,
                               const TaskCosts& costs, bool data_channel_collision);

}  // namespace trapsim
