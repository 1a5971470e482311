#pragma once

#include <optional>
#include <vector>

#include "trapsim/types.hpp"

namespace trapsim {

// Encode an energy level as an OOK burst: nominal_pulses(level) pulses at
// freq_hz with 50% duty cycle, first rising edge at start_time.
// Throws InvalidFrequency outside [1 kHz, 40 kHz].
PulseTrain encode(EnergyLevel level, double freq_hz, MicrosTime start_time);

// Number of rising edges. Empty train -> 0.
int count_pulses(const PulseTrain& train);

struct FrequencyEstimate {
    double freq_hz = 0.0;
    double quality = 0.0;  // 1 - IQR(periods)/median(period), clamped to [0,1]
};

// Estimate the OOK frequency from the inter-rising-edge periods. The
// median period anchors outlier rejection; the frequency itself comes from
// a least-squares fit over the longest run of inlier edges, which averages
// out the microsecond quantization. Throws TooFewPulses below 4 pulses.
FrequencyEstimate estimate_frequency(const PulseTrain& train);

// Nearest nominal level under geometric-midpoint boundaries:
// [1..45] Charging, [46..91] Low, [92..181] High, [182..) Full.
// Throws NoBurst for count 0.
EnergyLevel classify_level(int pulse_count);

struct Decoded {
    NodeId node;
    EnergyLevel level;
};

// Peak ON fraction over a sliding 8-pulse window. A single 50%-duty OOK
// burst stays near 0.5 everywhere; wherever two bursts overlap, the
// OR-union of their ON intervals pushes the local duty toward 0.75.
double duty_cycle(const PulseTrain& train);

// Decode a (possibly impaired) train against the roster. Returns nullopt
// (Corrupted) unless the period quality is >= 0.8, the duty cycle is
// plausible for a lone burst, and the estimated frequency lands within
// +-1 kHz of exactly one roster slot.
std::optional<Decoded> decode(const PulseTrain& train, const std::vector<NodeId>& roster);

constexpr double kDecodeQualityThreshold = 0.8;
constexpr double kDecodeDutyCeiling = 0.65;
constexpr double kSlotToleranceHz = 1'000.0;

// Nominal on-air time of a burst: nominal_pulses / freq, in microseconds.
MicrosTime burst_duration_us(EnergyLevel level, double freq_hz);

}  // namespace trapsim
