#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trapsim/burst_codec.hpp"
#include "trapsim/channel_model.hpp"
#include "trapsim/rng.hpp"

using namespace trapsim;

namespace {

PulseTrain make_train(int pulses, double freq_hz, MicrosTime start = 0) {
    const double period = 1e6 / freq_hz;
    PulseTrain t;
    t.origin_time = start;
    for (int i = 0; i < pulses; ++i) {
        t.edges.push_back(std::llround(start + i * period));
        t.edges.push_back(std::llround(start + i * period + period / 2));
    }
    return t;
}

ChannelParams deterministic_only() {
    ChannelParams params = calibrate_defaults();
    params.drop_prob = PiecewiseLinear{{{1'000.0, 0.0}}};
    params.spurious_rate = PiecewiseLinear{{{1'000.0, 0.0}}};
    return params;
}

}  // namespace

TEST_CASE("PiecewiseLinear interpolates and extrapolates flat") {
    const PiecewiseLinear pl{{{10.0, 0.0}, {20.0, 4.0}, {40.0, 4.0}}};
    CHECK(pl(10.0) == doctest::Approx(0.0));
    CHECK(pl(15.0) == doctest::Approx(2.0));
    CHECK(pl(20.0) == doctest::Approx(4.0));
    CHECK(pl(5.0) == doctest::Approx(0.0));    // below range: flat
    CHECK(pl(100.0) == doctest::Approx(4.0));  // above range: flat
}

TEST_CASE("default calibration anchors") {
    const ChannelParams params = calibrate_defaults();
    CHECK(params.settling_loss(12'000.0) == doctest::Approx(0.0));
    CHECK(params.settling_loss(31'000.0) == doctest::Approx(9.0));
    CHECK(params.drop_prob(12'000.0) == doctest::Approx(0.0));
    CHECK(params.spurious_rate(1'200.0) == doctest::Approx(0.8));
    CHECK(params.spurious_rate(12'000.0) == doctest::Approx(0.0));
    // Monotonicity over the band.
    for (double f = 1'200.0; f < 39'000.0; f += 200.0) {
        CHECK(params.settling_loss(f + 200.0) >= params.settling_loss(f));
        CHECK(params.drop_prob(f + 200.0) >= params.drop_prob(f));
        CHECK(params.spurious_rate(f + 200.0) <= params.spurious_rate(f));
    }
}

TEST_CASE("12 kHz is transparent: 32 pulses in, exactly 32 out") {
    const ChannelParams params = calibrate_defaults();
    const PulseTrain tx = make_train(32, 12'000.0);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto rng = make_rng(seed, rng_stream::channel);
        CHECK(count_pulses(impair(tx, params, rng)) == 32);
    }
}

TEST_CASE("settling alone removes exactly 9 leading pulses at 31 kHz") {
    const PulseTrain tx = make_train(40, 31'000.0);
    auto rng = make_rng(1, rng_stream::channel);
    const PulseTrain rx = impair(tx, deterministic_only(), rng);
    CHECK(count_pulses(rx) == 31);
    // The surviving pulses are the original trailing ones, untouched.
    for (std::size_t i = 0; i < rx.pulse_count(); ++i) {
        CHECK(rx.rising(i) == tx.rising(i + 9));
        CHECK(rx.falling(i) == tx.falling(i + 9));
    }
}

TEST_CASE("with stochastic terms disabled impair is a pure prefix truncation") {
    const ChannelParams params = deterministic_only();
    for (double f : {12'000.0, 20'000.0, 31'000.0, 39'000.0}) {
        const PulseTrain tx = make_train(128, f);
        auto rng = make_rng(3, rng_stream::channel);
        const PulseTrain rx = impair(tx, params, rng);
        const int lost = static_cast<int>(std::llround(params.settling_loss(f)));
        REQUIRE(count_pulses(rx) == 128 - lost);
        CHECK(rx.edges ==
              std::vector<MicrosTime>(tx.edges.begin() + 2 * lost, tx.edges.end()));
    }
}

TEST_CASE("received counts at 39 kHz match the published interval") {
    const ChannelParams params = calibrate_defaults();
    const PulseTrain tx = make_train(256, 39'000.0);
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 1'000; ++seed) {
        auto rng = make_rng(seed, rng_stream::channel);
        const int n = count_pulses(impair(tx, params, rng));
        if (n >= 189 && n <= 221) ++inside;
    }
    CHECK(inside >= 990);
}

TEST_CASE("received counts for short bursts at 39 kHz") {
    const ChannelParams params = calibrate_defaults();
    const PulseTrain tx = make_train(32, 39'000.0);
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 1'000; ++seed) {
        auto rng = make_rng(seed, rng_stream::channel);
        const int n = count_pulses(impair(tx, params, rng));
        if (n >= 5 && n <= 17) ++inside;
    }
    CHECK(inside >= 950);
}

TEST_CASE("low-frequency spurious insertions add at most one counted pulse") {
    const ChannelParams params = calibrate_defaults();
    int in_range_32 = 0, in_range_256 = 0;
    for (std::uint64_t seed = 0; seed < 1'000; ++seed) {
        auto rng = make_rng(seed, rng_stream::channel);
        const int n32 = count_pulses(impair(make_train(32, 1'200.0), params, rng));
        if (n32 == 32 || n32 == 33) ++in_range_32;
        const int n256 = count_pulses(impair(make_train(256, 1'200.0), params, rng));
        if (n256 == 256 || n256 == 257) ++in_range_256;
    }
    CHECK(in_range_32 >= 950);
    CHECK(in_range_256 >= 950);
}

TEST_CASE("impair is deterministic for a fixed seed") {
    const ChannelParams params = calibrate_defaults();
    const PulseTrain tx = make_train(256, 39'000.0);
    auto rng_a = make_rng(99, rng_stream::channel);
    auto rng_b = make_rng(99, rng_stream::channel);
    CHECK(impair(tx, params, rng_a).edges == impair(tx, params, rng_b).edges);
}

TEST_CASE("expected received count degrades monotonically with frequency") {
    const ChannelParams params = calibrate_defaults();
    auto mean_count = [&](double f) {
        const PulseTrain tx = make_train(256, f);
        double total = 0;
        for (std::uint64_t seed = 0; seed < 2'000; ++seed) {
            auto rng = make_rng(seed, rng_stream::channel);
            total += count_pulses(impair(tx, params, rng));
        }
        return total / 2'000.0;
    };
    const double at_12k = mean_count(12'000.0);
    const double at_26k = mean_count(26'000.0);
    const double at_39k = mean_count(39'000.0);
    CHECK(at_12k >= at_26k);
    CHECK(at_26k >= at_39k);
}

TEST_CASE("impaired output is always a valid pulse train") {
    const ChannelParams params = calibrate_defaults();
    for (double f : {1'200.0, 12'000.0, 26'000.0, 39'000.0}) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            auto rng = make_rng(seed, rng_stream::channel);
            CHECK(impair(make_train(64, f), params, rng).valid());
        }
    }
}

TEST_CASE("overlap passes disjoint events through unchanged") {
    ChannelEvent a{encode(EnergyLevel::Low, 26'000.0, 0), {1, 26'000.0}, 0, 0};
    a.end = a.train.edges.back();
    ChannelEvent b{encode(EnergyLevel::Low, 31'000.0, 100'000), {2, 31'000.0}, 100'000, 0};
    b.end = b.train.edges.back();
    const auto windows = overlap({a, b});
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].train.edges == a.train.edges);
    CHECK(windows[0].contributors == std::vector<int>{1});
    CHECK(windows[1].train.edges == b.train.edges);
    CHECK(windows[1].contributors == std::vector<int>{2});
}

TEST_CASE("OR-merge is idempotent for identical simultaneous bursts") {
    const PulseTrain t = encode(EnergyLevel::High, 26'000.0, 0);
    CHECK(merge_trains({&t, &t}).edges == t.edges);
}

TEST_CASE("merged overlapping bursts keep edge alternation and defeat decode") {
    ChannelEvent a{encode(EnergyLevel::Full, 26'000.0, 0), {1, 26'000.0}, 0, 0};
    a.end = a.train.edges.back();
    const MicrosTime half = a.end / 2;
    ChannelEvent b{encode(EnergyLevel::Full, 31'000.0, half), {2, 31'000.0}, half, 0};
    b.end = b.train.edges.back();
    const auto windows = overlap({a, b});
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].train.valid());
    CHECK(windows[0].contributors == std::vector<int>{1, 2});
    CHECK(!decode(windows[0].train, {{1, 26'000.0}, {2, 31'000.0}}).has_value());
}
