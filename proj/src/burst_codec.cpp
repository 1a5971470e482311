#include "trapsim/burst_codec.hpp"

#include <algorithm>
#include <cmath>

namespace trapsim {

const char* to_string(EnergyLevel level) {
    switch (level) {
        case EnergyLevel::Charging: return "Charging";
        case EnergyLevel::Low: return "Low";
        case EnergyLevel::High: return "High";
        case EnergyLevel::Full: return "Full";
    }
    return "?";
}

bool PulseTrain::valid() const {
    if (edges.size() % 2 != 0) return false;
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (edges[i] <= edges[i - 1]) return false;
    }
    return true;
}

PulseTrain encode(EnergyLevel level, double freq_hz, MicrosTime start_time) {
    if (freq_hz < kMinOokFreqHz || freq_hz > kMaxOokFreqHz) throw InvalidFrequency(freq_hz);
    const int n = nominal_pulses(level);
    const double period_us = 1e6 / freq_hz;
    PulseTrain train;
    train.origin_time = start_time;
    train.edges.reserve(2 * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double rise = start_time + i * period_us;
        train.edges.push_back(std::llround(rise));
        train.edges.push_back(std::llround(rise + period_us / 2));
    }
    return train;
}

MicrosTime burst_duration_us(EnergyLevel level, double freq_hz) {
    if (freq_hz < kMinOokFreqHz || freq_hz > kMaxOokFreqHz) throw InvalidFrequency(freq_hz);
    return std::llround(nominal_pulses(level) * 1e6 / freq_hz);
}

int count_pulses(const PulseTrain& train) {
    return static_cast<int>(train.pulse_count());
}

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

FrequencyEstimate estimate_frequency(const PulseTrain& train) {
    const std::size_t n = train.pulse_count();
    if (n < 4) throw TooFewPulses();

    std::vector<double> periods(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        periods[i] = static_cast<double>(train.rising(i + 1) - train.rising(i));
    }
    std::vector<double> sorted = periods;
    std::sort(sorted.begin(), sorted.end());
    const double median = interpolated_quantile(sorted, 0.5);
    const double iqr = interpolated_quantile(sorted, 0.75) - interpolated_quantile(sorted, 0.25);

    FrequencyEstimate est;
    est.quality = std::clamp(1.0 - iqr / median, 0.0, 1.0);

    // Longest run of periods within 25% of the median.
    auto is_inlier = [&](double p) { return std::abs(p - median) <= 0.25 * median; };
    std::size_t best_begin = 0, best_len = 0, begin = 0, len = 0;
    for (std::size_t i = 0; i < periods.size(); ++i) {
        if (is_inlier(periods[i])) {
            if (len == 0) begin = i;
            if (++len > best_len) {
                best_len = len;
                best_begin = begin;
            }
        } else {
            len = 0;
        }
    }
    if (best_len == 0) {
        est.freq_hz = 1e6 / median;
        return est;
    }

    // Least-squares slope of rising-edge time vs. pulse index over the run.
    const std::size_t first = best_begin;
    const std::size_t count = best_len + 1;  // edges spanning best_len periods
    double sum_i = 0, sum_t = 0, sum_ii = 0, sum_it = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double i = static_cast<double>(k);
        const double t = static_cast<double>(train.rising(first + k));
        sum_i += i;
        sum_t += t;
        sum_ii += i * i;
        sum_it += i * t;
    }
    const double m = static_cast<double>(count);
    const double slope = (m * sum_it - sum_i * sum_t) / (m * sum_ii - sum_i * sum_i);
    est.freq_hz = 1e6 / slope;
    return est;
}

EnergyLevel classify_level(int pulse_count) {
    if (pulse_count <= 0) throw NoBurst();
    if (pulse_count <= 45) return EnergyLevel::Charging;
    if (pulse_count <= 91) return EnergyLevel::Low;
    if (pulse_count <= 181) return EnergyLevel::High;
    return EnergyLevel::Full;
}

double duty_cycle(const PulseTrain& train) {
    const std::size_t n = train.pulse_count();
    if (n == 0) return 0.0;

    auto window_duty = [&](std::size_t first, std::size_t last) {  // pulses [first, last]
        MicrosTime on = 0;
        for (std::size_t i = first; i <= last; ++i) on += train.falling(i) - train.rising(i);
        const MicrosTime span = train.falling(last) - train.rising(first);
        return span > 0 ? static_cast<double>(on) / static_cast<double>(span) : 1.0;
    };

    // Peak ON fraction over a sliding 8-pulse window: a localized overlap
    // region stands out even when most of the train is a lone burst.
    constexpr std::size_t kWindow = 8;
    if (n <= kWindow) return window_duty(0, n - 1);
    double peak = 0.0;
    for (std::size_t i = 0; i + kWindow - 1 < n; ++i) {
        peak = std::max(peak, window_duty(i, i + kWindow - 1));
    }
    return peak;
}

std::optional<Decoded> decode(const PulseTrain& train, const std::vector<NodeId>& roster) {
    if (train.pulse_count() < 4) return std::nullopt;
    const FrequencyEstimate est = estimate_frequency(train);
    if (est.quality < kDecodeQualityThreshold) return std::nullopt;
    if (duty_cycle(train) > kDecodeDutyCeiling) return std::nullopt;

    const NodeId* match = nullptr;
    for (const NodeId& node : roster) {
        if (std::abs(node.assigned_freq_hz - est.freq_hz) <= kSlotToleranceHz) {
            if (match != nullptr) return std::nullopt;  // ambiguous
            match = &node;
        }
    }
    if (match == nullptr) return std::nullopt;
    return Decoded{*match, classify_level(count_pulses(train))};
}

}  // namespace trapsim
