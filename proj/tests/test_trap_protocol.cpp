#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "trapsim/rng.hpp"
#include "trapsim/trap_protocol.hpp"

using namespace trapsim;

namespace {
constexpr MicrosTime kPeriod = 60'000'000;  // 1 min status period
}

TEST_CASE("a decoded burst updates the neighbor table") {
    NeighborTable table;
    on_burst_received(Decoded{{2, 26'000.0}, EnergyLevel::High}, table, 1'000, kPeriod);
    const auto* entry = table.find(2);
    REQUIRE(entry != nullptr);
    CHECK(entry->level == EnergyLevel::High);
    CHECK(entry->timestamp == 1'000);
}

TEST_CASE("a Corrupted burst leaves the table unchanged") {
    NeighborTable table;
    on_burst_received(Decoded{{2, 26'000.0}, EnergyLevel::Full}, table, 1'000, kPeriod);
    on_burst_received(std::nullopt, table, 2'000, kPeriod);
    CHECK(table.size() == 1);
    const auto* entry = table.find(2);
    REQUIRE(entry != nullptr);
    CHECK(entry->level == EnergyLevel::Full);
    CHECK(entry->timestamp == 1'000);
}

TEST_CASE("last write wins when a neighbor reports a lower level") {
    NeighborTable table;
    on_burst_received(Decoded{{2, 26'000.0}, EnergyLevel::Full}, table, 1'000, kPeriod);
    on_burst_received(Decoded{{2, 26'000.0}, EnergyLevel::Charging}, table, 2'000, kPeriod);
    CHECK(table.find(2)->level == EnergyLevel::Charging);
}

TEST_CASE("entries expire after two missed periods") {
    NeighborTable table;
    table.update(2, EnergyLevel::High, 0, kPeriod);
    const auto* entry = table.find(2);
    REQUIRE(entry != nullptr);
    CHECK(!table.is_stale(*entry, 2 * kPeriod));
    CHECK(table.is_stale(*entry, 2 * kPeriod + 1));
}

TEST_CASE("decide_transmit in Trap mode") {
    const TaskCosts costs;
    NeighborTable table;
    table.update(2, EnergyLevel::High, 0, kPeriod);

    SUBCASE("fresh High neighbor and full storage engage") {
        const Decision d = decide_transmit(1.00, 2, table, ProtocolMode::Trap, costs, 1'000);
        CHECK(d.engage);
    }
    SUBCASE("a Full neighbor is at least as good as High") {
        table.update(2, EnergyLevel::Full, 0, kPeriod);
        CHECK(decide_transmit(1.00, 2, table, ProtocolMode::Trap, costs, 1'000).engage);
    }
    SUBCASE("a Low neighbor postpones") {
        table.update(2, EnergyLevel::Low, 0, kPeriod);
        const Decision d = decide_transmit(1.00, 2, table, ProtocolMode::Trap, costs, 1'000);
        CHECK(!d.engage);
        CHECK(d.reason == PostponeReason::NeighborLow);
    }
    SUBCASE("own storage below the TX cost postpones first") {
        const Decision d = decide_transmit(0.60, 2, table, ProtocolMode::Trap, costs, 1'000);
        CHECK(!d.engage);
        CHECK(d.reason == PostponeReason::SelfLow);
    }
    SUBCASE("an unknown neighbor postpones") {
        const Decision d = decide_transmit(1.00, 9, table, ProtocolMode::Trap, costs, 1'000);
        CHECK(!d.engage);
        CHECK(d.reason == PostponeReason::NeighborUnknown);
    }
    SUBCASE("a stale High entry never justifies an engage") {
        const Decision d =
            decide_transmit(1.00, 2, table, ProtocolMode::Trap, costs, 3 * kPeriod);
        CHECK(!d.engage);
        CHECK(d.reason == PostponeReason::Stale);
    }
}

TEST_CASE("decide_transmit in Baseline mode ignores the neighbor table") {
    const TaskCosts costs;
    NeighborTable table;
    table.update(2, EnergyLevel::Charging, 0, kPeriod);
    CHECK(decide_transmit(1.00, 2, table, ProtocolMode::Baseline, costs, 1'000).engage);
    CHECK(decide_transmit(1.00, 9, NeighborTable{}, ProtocolMode::Baseline, costs, 0).engage);
    const Decision d = decide_transmit(0.99, 2, table, ProtocolMode::Baseline, costs, 1'000);
    CHECK(!d.engage);
    CHECK(d.reason == PostponeReason::SelfLow);
}

TEST_CASE("TrapWithCsma applies the same engage rule") {
    const TaskCosts costs;
    NeighborTable table;
    table.update(2, EnergyLevel::High, 0, kPeriod);
    CHECK(decide_transmit(1.00, 2, table, ProtocolMode::TrapWithCsma, costs, 1'000).engage);
    table.update(2, EnergyLevel::Low, 0, kPeriod);
    CHECK(!decide_transmit(1.00, 2, table, ProtocolMode::TrapWithCsma, costs, 1'000).engage);
}

TEST_CASE("csma_schedule draws a back-off inside the configured range") {
    auto rng = make_rng(5, rng_stream::backoff);
    const BackoffRange range{0, 10'000};
    auto idle = [](MicrosTime, MicrosTime) { return false; };
    for (int i = 0; i < 200; ++i) {
        const auto tx = csma_schedule(range, rng, 1'000'000, idle);
        REQUIRE(tx.has_value());
        CHECK(*tx >= 1'000'000);
        CHECK(*tx <= 1'010'000);
    }
}

TEST_CASE("csma_schedule aborts on a busy channel") {
    auto rng = make_rng(5, rng_stream::backoff);
    auto busy = [](MicrosTime, MicrosTime) { return true; };
    CHECK(!csma_schedule(BackoffRange{0, 10'000}, rng, 0, busy).has_value());
}

TEST_CASE("a degenerate back-off range is deterministic") {
    auto rng = make_rng(5, rng_stream::backoff);
    auto idle = [](MicrosTime, MicrosTime) { return false; };
    const auto tx = csma_schedule(BackoffRange{5'000, 5'000}, rng, 2'000, idle);
    REQUIRE(tx.has_value());
    CHECK(*tx == 7'000);
}

TEST_CASE("execute_data_tx when the receiver is ready") {
    const TaskCosts costs;
    const DeliveryResult r = execute_data_tx(CapacitorState{1.00, true, 0},
                                             CapacitorState{0.75, true, 0}, costs, false);
    CHECK(r.success);
    CHECK(r.sender.energy_fraction == doctest::Approx(0.00));
    CHECK(!r.sender.mcu_on);  // TX drained the sender: power failure
    CHECK(r.receiver.energy_fraction == doctest::Approx(0.05));
    CHECK(r.receiver.mcu_on);
}

TEST_CASE("the sender wastes its energy when the receiver is low") {
    const TaskCosts costs;
    const DeliveryResult r = execute_data_tx(CapacitorState{1.00, true, 0},
                                             CapacitorState{0.40, true, 0}, costs, false);
    CHECK(!r.success);
    CHECK(r.failure == DeliveryFailure::ReceiverLow);
    CHECK(r.sender.energy_fraction == doctest::Approx(0.00));
    CHECK(r.receiver.energy_fraction == doctest::Approx(0.40));  // untouched
}

TEST_CASE("a data-channel collision fails even a ready receiver") {
    const TaskCosts costs;
    const DeliveryResult r = execute_data_tx(CapacitorState{1.00, true, 0},
                                             CapacitorState{1.00, true, 0}, costs, true);
    CHECK(!r.success);
    CHECK(r.failure == DeliveryFailure::Collision);
    CHECK(r.sender.energy_fraction == doctest::Approx(0.00));
    CHECK(r.receiver.energy_fraction == doctest::Approx(1.00));
}

TEST_CASE("execute_data_tx rejects a sender that cannot pay the TX cost") {
    const TaskCosts costs;
    CHECK_THROWS_AS(execute_data_tx(CapacitorState{0.50, true, 0},
                                    CapacitorState{1.00, true, 0}, costs, false),
                    std::logic_error);
}
