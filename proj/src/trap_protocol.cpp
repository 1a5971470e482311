#include "trapsim/trap_protocol.hpp"

#include <stdexcept>

namespace trapsim {

const char* to_string(ProtocolMode mode) {
    switch (mode) {
        case ProtocolMode::Trap: return "trap";
        case ProtocolMode::Baseline: return "baseline";
        case ProtocolMode::TrapWithCsma: return "csma";
    }
    return "?";
}

const char* to_string(PostponeReason reason) {
    switch (reason) {
        case PostponeReason::SelfLow: return "SelfLow";
        case PostponeReason::NeighborUnknown: return "NeighborUnknown";
        case PostponeReason::NeighborLow: return "NeighborLow";
        case PostponeReason::Stale: return "Stale";
    }
    return "?";
}

const char* to_string(DeliveryFailure reason) {
    switch (reason) {
        case DeliveryFailure::ReceiverLow: return "ReceiverLow";
        case DeliveryFailure::Collision: return "Collision";
    }
    return "?";
}

void NeighborTable::update(int node, EnergyLevel level, MicrosTime now,
                           MicrosTime expected_period_us) {
    entries_[node] = Entry{level, now, expected_period_us};
}

const NeighborTable::Entry* NeighborTable::find(int node) const {
    const auto it = entries_.find(node);
    return it == entries_.end() ? nullptr : &it->second;
}

bool NeighborTable::is_stale(const Entry& entry, MicrosTime now) const {
    return now - entry.timestamp > 2 * entry.expected_period_us;
}

void on_burst_received(const std::optional<Decoded>& decoded, NeighborTable& table,
                       MicrosTime now, MicrosTime expected_period_us) {
    if (!decoded.has_value()) return;
    table.update(decoded->node.id, decoded->level, now, expected_period_us);
}

Decision decide_transmit(double self_energy, int target, const NeighborTable& table,
                         ProtocolMode mode, const TaskCosts& costs, MicrosTime now) {
    if (self_energy < costs.tx_cost) return {false, PostponeReason::SelfLow};
    if (mode == ProtocolMode::Baseline) return {true, {}};

    const NeighborTable::Entry* entry = table.find(target);
    if (entry == nullptr) return {false, PostponeReason::NeighborUnknown};
    if (table.is_stale(*entry, now)) return {false, PostponeReason::Stale};
    if (entry->level < EnergyLevel::High) return {false, PostponeReason::NeighborLow};
    return {true, {}};
}

std::optional<MicrosTime> csma_schedule(
    const BackoffRange& range, std::mt19937_64& rng, MicrosTime now,
    const std::function<bool(MicrosTime, MicrosTime)>& channel_active_during) {
    if (range.max_us < range.min_us) throw std::invalid_argument("empty back-off range");
    std::uniform_int_distribution<MicrosTime> dist(range.min_us, range.max_us);
    const MicrosTime tx_time = now + dist(rng);
    if (channel_active_during(now, tx_time)) return std::nullopt;
    return tx_time;
}

DeliveryResult execute_data_tx(const CapacitorState& sender, const CapacitorState& receiver,
                               const TaskCosts& costs, bool data_channel_collision) {
    DeliveryResult result;
    result.receiver = receiver;
    const auto drained = consume(sender, costs.tx_cost);
    if (!drained.has_value()) throw std::logic_error("data TX executed without tx_cost energy");
    result.sender = *drained;

    if (data_channel_collision) {
        result.failure = DeliveryFailure::Collision;
        return result;
    }
    const auto received = consume(receiver, costs.rx_cost);
    if (!received.has_value()) {
        result.failure = DeliveryFailure::ReceiverLow;
        return result;
    }
    result.success = true;
    result.receiver = *received;
    return result;
}

}  // namespace trapsim
