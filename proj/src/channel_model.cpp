#include "trapsim/channel_model.hpp"

#include <algorithm>
#include <cmath>

#include "trapsim/burst_codec.hpp"

namespace trapsim {

double PiecewiseLinear::operator()(double freq_hz) const {
    if (points.empty()) return 0.0;
    if (freq_hz <= points.front().first) return points.front().second;
    if (freq_hz >= points.back().first) return points.back().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (freq_hz <= points[i].first) {
            const auto& [f0, v0] = points[i - 1];
            const auto& [f1, v1] = points[i];
            return v0 + (v1 - v0) * (freq_hz - f0) / (f1 - f0);
        }
    }
    return points.back().second;
}

ChannelParams calibrate_defaults() {
    ChannelParams params;
    params.settling_loss.points = {{1'200.0, 0.0}, {12'000.0, 0.0}, {31'000.0, 9.0}, {39'000.0, 19.0}};
    // The zero shoulders extend past 12 kHz on both sides so that the
    // quantization bias of the in-channel frequency estimate (a few tens
    // of Hz) cannot drag a nominally clean 12 kHz burst into the lossy or
    // noisy region.
    params.drop_prob.points = {{1'200.0, 0.0}, {12'500.0, 0.0}, {39'000.0, 0.134}};
    params.spurious_rate.points = {{1'200.0, 0.8}, {11'500.0, 0.0}};
    return params;
}

namespace {

// Robust base-period estimate: median period rejects outliers, the mean
// over the inliers averages out quantization.
double base_period_us(const PulseTrain& train) {
    const std::size_t n = train.pulse_count();
    std::vector<double> periods;
    periods.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        periods.push_back(static_cast<double>(train.rising(i + 1) - train.rising(i)));
    }
    std::vector<double> sorted = periods;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    double sum = 0;
    std::size_t count = 0;
    for (double p : periods) {
        if (std::abs(p - median) <= 0.25 * median) {
            sum += p;
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : median;
}

}  // namespace

PulseTrain impair(const PulseTrain& train, const ChannelParams& params, std::mt19937_64& rng) {
    if (train.pulse_count() < 2) return train;

    const double period = base_period_us(train);
    const double freq_hz = 1e6 / period;

    const int settle = static_cast<int>(std::llround(params.settling_loss(freq_hz)));
    const double drop = params.drop_prob(freq_hz);
    const double spurious_hz = params.spurious_rate(freq_hz);

    std::vector<std::pair<MicrosTime, MicrosTime>> on;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = train.pulse_count();
    for (std::size_t i = static_cast<std::size_t>(std::max(settle, 0)); i < n; ++i) {
        if (drop > 0.0 && unit(rng) < drop) continue;
        on.emplace_back(train.rising(i), train.falling(i));
    }

    if (spurious_hz > 0.0) {
        const MicrosTime window_start = train.rising(0);
        const MicrosTime window_end = train.falling(n - 1);
        const double window_s = static_cast<double>(window_end - window_start) * 1e-6;
        std::poisson_distribution<int> count_dist(spurious_hz * window_s);
        const int inserted = count_dist(rng);
        const auto width = static_cast<MicrosTime>(std::llround(period / 2));
        for (int k = 0; k < inserted; ++k) {
            const auto t = window_start +
                           static_cast<MicrosTime>(unit(rng) * static_cast<double>(window_end - window_start));
            on.emplace_back(t, t + width);
        }
    }

    std::sort(on.begin(), on.end());

    PulseTrain out;
    out.origin_time = train.origin_time;
    MicrosTime cur_start = 0, cur_end = -1;
    auto flush = [&] {
        if (cur_end > cur_start) {
            out.edges.push_back(cur_start);
            out.edges.push_back(cur_end);
        }
    };
    for (const auto& [start, end] : on) {
        if (cur_end < 0) {
            cur_start = start;
            cur_end = end;
        } else if (start <= cur_end) {
            cur_end = std::max(cur_end, end);
        } else {
            flush();
            cur_start = start;
            cur_end = end;
        }
    }
    if (cur_end >= 0) flush();
    return out;
}

PulseTrain merge_trains(const std::vector<const PulseTrain*>& trains) {
    std::vector<std::pair<MicrosTime, MicrosTime>> on;
    for (const PulseTrain* train : trains) {
        for (std::size_t i = 0; i < train->pulse_count(); ++i) {
            on.emplace_back(train->rising(i), train->falling(i));
        }
    }
    std::sort(on.begin(), on.end());

    PulseTrain out;
    if (on.empty()) return out;
    out.origin_time = on.front().first;
    MicrosTime cur_start = on.front().first;
    MicrosTime cur_end = on.front().second;
    for (std::size_t i = 1; i < on.size(); ++i) {
        if (on[i].first <= cur_end) {
            cur_end = std::max(cur_end, on[i].second);
        } else {
            out.edges.push_back(cur_start);
            out.edges.push_back(cur_end);
            cur_start = on[i].first;
            cur_end = on[i].second;
        }
    }
    out.edges.push_back(cur_start);
    out.edges.push_back(cur_end);
    return out;
}

std::vector<ReceiverWindow> overlap(const std::vector<ChannelEvent>& events) {
    std::vector<ReceiverWindow> windows;
    std::size_t i = 0;
    while (i < events.size()) {
        std::size_t j = i;
        MicrosTime end = events[i].end;
        while (j + 1 < events.size() && events[j + 1].start < end) {
            ++j;
            end = std::max(end, events[j].end);
        }
        ReceiverWindow window;
        window.start = events[i].start;
        window.end = end;
        std::vector<const PulseTrain*> group;
        for (std::size_t k = i; k <= j; ++k) {
            group.push_back(&events[k].train);
            window.contributors.push_back(events[k].tx_node.id);
        }
        window.train = (group.size() == 1) ? *group.front() : merge_trains(group);
        windows.push_back(std::move(window));
        i = j + 1;
    }
    return windows;
}

}  // namespace trapsim
