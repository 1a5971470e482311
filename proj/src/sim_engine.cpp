#include "trapsim/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>

#include "trapsim/rng.hpp"

namespace trapsim {

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::HarvestTick: return "HarvestTick";
        case EventKind::AutoModFire: return "AutoModFire";
        case EventKind::BurstArrival: return "BurstArrival";
        case EventKind::DecodeComplete: return "DecodeComplete";
        case EventKind::TxDecision: return "TxDecision";
        case EventKind::DataTxStart: return "DataTxStart";
        case EventKind::DataTxEnd: return "DataTxEnd";
        case EventKind::PowerFail: return "PowerFail";
        case EventKind::Boot: return "Boot";
    }
    return "?";
}

namespace {

std::string fmt(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

}  // namespace

void write_trace_csv(const Trace& trace, std::ostream& out) {
    out << "time_us,kind,node,payload\n";
    for (const TraceRow& row : trace) {
        out << row.time_us << ',' << to_string(row.kind) << ',' << row.node << ',' << row.payload
            << '\n';
    }
}

nlohmann::json to_json(const Metrics& m) {
    return nlohmann::json{{"tx_actions", m.tx_actions},
                          {"successful_receptions", m.successful_receptions},
                          {"success_rate", m.success_rate},
                          {"throughput_per_min", m.throughput_per_min},
                          {"failure_breakdown", m.failure_breakdown},
                          {"listening_time_s", m.listening_time_s},
                          {"listening_energy_uj", m.listening_energy_uj},
                          {"postpone_breakdown", m.postpone_breakdown},
                          {"decoded_bursts", m.decoded_bursts},
                          {"corrupted_bursts", m.corrupted_bursts},
                          {"overlap_events", m.overlap_events},
                          {"engage_from_overlap", m.engage_from_overlap},
                          {"csma_aborts", m.csma_aborts},
                          {"power_failures", m.power_failures},
                          {"simulated_minutes", m.simulated_minutes}};
}

std::vector<ResolvedNodeParams> resolve_node_params(const Scenario& scenario, std::uint64_t seed) {
    std::vector<ResolvedNodeParams> resolved;
    for (const NodeSpec& spec : scenario.nodes) {
        ResolvedNodeParams params;
        params.id = spec.id;
        if (spec.drift_ppm) {
            params.drift_ppm = *spec.drift_ppm;
        } else {
            auto rng = make_rng(seed, rng_stream::node_setup, spec.id, 1);
            params.drift_ppm =
                std::uniform_real_distribution<double>(-spec.drift_max_ppm, spec.drift_max_ppm)(rng);
        }
        if (spec.phase_offset_ms) {
            params.phase_offset_ms = *spec.phase_offset_ms;
        } else {
            auto rng = make_rng(seed, rng_stream::node_setup, spec.id, 2);
            params.phase_offset_ms =
                std::uniform_real_distribution<double>(0.0, spec.period_ms)(rng);
        }
        resolved.push_back(params);
    }
    return resolved;
}

namespace {

struct Event {
    MicrosTime time = 0;
    int node = 0;
    EventKind kind = EventKind::HarvestTick;
    std::uint64_t seq = 0;
    std::uint64_t burst_id = 0;
    int peer = 0;
    MicrosTime decision_time = 0;
    int tx_index = -1;
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.node != b.node) return a.node > b.node;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

struct ActiveBurst {
    std::uint64_t id = 0;
    int node = 0;
    MicrosTime start = 0;
    MicrosTime end = 0;
    PulseTrain train;
    bool delivered = false;
};

struct DataTxRecord {
    int sender = 0;
    int receiver = 0;
    MicrosTime start = 0;
    MicrosTime end = 0;
    bool success = false;
    std::string outcome;
};

struct NodeRt {
    NodeSpec spec;
    NodeId nid;
    AutoModConfig automod;
    CapacitorState cap;
    NeighborTable table;
    MicrosTime busy_until = 0;
    std::int64_t tick_index = 0;
    bool listening = false;
    MicrosTime listening_since = 0;
    MicrosTime listening_total_us = 0;
    std::vector<int> targets;
};

class Engine {
public:
    Engine(const Scenario& scenario, std::uint64_t seed) : sc_(scenario), seed_(seed) {
        duration_us_ = static_cast<MicrosTime>(std::llround(scenario.duration_s * 1e6));
        tx_duration_us_ = static_cast<MicrosTime>(std::llround(scenario.data_tx_duration_ms * 1e3));
        const auto resolved = resolve_node_params(scenario, seed);
        for (std::size_t i = 0; i < scenario.nodes.size(); ++i) {
            const NodeSpec& spec = scenario.nodes[i];
            NodeRt rt;
            rt.spec = spec;
            rt.nid = NodeId{spec.id, spec.freq_hz};
            rt.automod.t1 = spec.thresholds[0];
            rt.automod.t2 = spec.thresholds[1];
            rt.automod.t3 = spec.thresholds[2];
            rt.automod.period_ms = spec.period_ms;
            rt.automod.drift_ppm = resolved[i].drift_ppm;
            rt.automod.phase_offset_ms = resolved[i].phase_offset_ms;
            rt.cap.energy_fraction = spec.initial_energy;
            rt.cap.mcu_on = spec.initial_energy >= rt.automod.t1;
            for (const TrafficSpec& t : scenario.traffic) {
                if (t.sender == spec.id) rt.targets.push_back(t.receiver);
            }
            roster_.push_back(rt.nid);
            nodes_.emplace(spec.id, std::move(rt));
        }
        result_.resolved_nodes = resolved;
    }

    RunResult run() {
        for (auto& [id, rt] : nodes_) {
            schedule({first_fire_time(rt.automod), id, EventKind::AutoModFire});
            const auto tick = static_cast<MicrosTime>(std::llround(rt.spec.harvest.interval_s * 1e6));
            schedule({tick, id, EventKind::HarvestTick});
            refresh_listening(rt, 0);
        }
        while (!queue_.empty() && queue_.top().time <= duration_us_) {
            const Event event = queue_.top();
            queue_.pop();
            dispatch(event);
        }
        for (auto& [id, rt] : nodes_) flush_listening(rt, duration_us_);
        finalize_metrics();
        return std::move(result_);
    }

private:
    Metrics& metrics() { return result_.metrics; }

    void schedule(Event event) {
        event.seq = next_seq_++;
        queue_.push(std::move(event));
    }

    void trace(MicrosTime time, EventKind kind, int node, std::string payload) {
        result_.trace.push_back({time, kind, node, std::move(payload)});
    }

    bool wants_listen(const NodeRt& rt, MicrosTime now) const {
        return sc_.mode != ProtocolMode::Baseline && rt.cap.mcu_on &&
               rt.cap.energy_fraction >= sc_.costs.tx_cost && !rt.targets.empty() &&
               now >= rt.busy_until;
    }

    void refresh_listening(NodeRt& rt, MicrosTime now) {
        const bool want = wants_listen(rt, now);
        if (want == rt.listening) return;
        if (rt.listening) rt.listening_total_us += now - rt.listening_since;
        else rt.listening_since = now;
        rt.listening = want;
    }

    void flush_listening(NodeRt& rt, MicrosTime now) {
        if (rt.listening) {
            rt.listening_total_us += now - rt.listening_since;
            rt.listening_since = now;
        }
    }

    void note_power_fail(NodeRt& rt, MicrosTime now) {
        rt.table.clear();
        ++metrics().power_failures;
        trace(now, EventKind::PowerFail, rt.spec.id, "energy=0");
    }

    void dispatch(const Event& event) {
        switch (event.kind) {
            case EventKind::HarvestTick: on_harvest_tick(event); break;
            case EventKind::AutoModFire: on_auto_mod_fire(event); break;
            case EventKind::BurstArrival: on_burst_arrival(event); break;
            case EventKind::DataTxStart: on_data_tx_start(event); break;
            case EventKind::DataTxEnd: on_data_tx_end(event); break;
            default: break;  // remaining kinds are trace-only
        }
    }

    void on_harvest_tick(const Event& event) {
        NodeRt& rt = nodes_.at(event.node);
        ++rt.tick_index;
        auto rng = make_rng(seed_, rng_stream::harvest, rt.spec.id, rt.tick_index);
        const bool was_on = rt.cap.mcu_on;
        rt.cap = harvest_step(rt.cap, rt.spec.harvest, rt.automod.t1, rng, event.time);
        trace(event.time, EventKind::HarvestTick, rt.spec.id,
              "energy=" + fmt(rt.cap.energy_fraction));
        if (!was_on && rt.cap.mcu_on) {
            rt.table.clear();
            trace(event.time, EventKind::Boot, rt.spec.id, "energy=" + fmt(rt.cap.energy_fraction));
        }
        if (sc_.mode == ProtocolMode::Baseline && rt.cap.mcu_on && !rt.targets.empty() &&
            event.time >= rt.busy_until) {
            const Decision decision = decide_transmit(rt.cap.energy_fraction, rt.targets.front(),
                                                      rt.table, sc_.mode, sc_.costs, event.time);
            if (decision.engage) {
                trace(event.time, EventKind::TxDecision, rt.spec.id,
                      "decision=Engage;target=" + std::to_string(rt.targets.front()));
                do_data_tx(rt, nodes_.at(rt.targets.front()), event.time);
            }
        }
        const auto tick = static_cast<MicrosTime>(std::llround(rt.spec.harvest.interval_s * 1e6));
        schedule({event.time + tick, rt.spec.id, EventKind::HarvestTick});
        refresh_listening(rt, event.time);
    }

    void on_auto_mod_fire(const Event& event) {
        NodeRt& rt = nodes_.at(event.node);
        // The auto-modulator fires whether or not the MCU is powered.
        const ChannelEvent emitted = emit(rt.nid, rt.cap.energy_fraction, rt.automod, event.time);
        ActiveBurst burst;
        burst.id = next_burst_id_++;
        burst.node = rt.spec.id;
        burst.start = emitted.start;
        burst.end = emitted.end;
        burst.train = emitted.train;
        bursts_.push_back(std::move(burst));
        trace(event.time, EventKind::AutoModFire, rt.spec.id,
              std::string("level=") + to_string(quantize(rt.cap.energy_fraction, rt.automod)) +
                  ";end_us=" + std::to_string(emitted.end));
        schedule({emitted.end, rt.spec.id, EventKind::BurstArrival, 0, bursts_.back().id});
        schedule({next_fire_time(event.time, rt.automod), rt.spec.id, EventKind::AutoModFire});
        // A node cannot decode while its own reflection floods the
        // receiver; listening resumes at burst end.
    }

    void on_burst_arrival(const Event& event) {
        // Collect the transitive overlap closure around this burst.
        std::vector<ActiveBurst*> blob;
        ActiveBurst* self = nullptr;
        for (ActiveBurst& b : bursts_) {
            if (b.id == event.burst_id) self = &b;
        }
        if (self == nullptr || self->delivered) return;
        blob.push_back(self);
        bool grew = true;
        while (grew) {
            grew = false;
            for (ActiveBurst& b : bursts_) {
                if (b.delivered) continue;
                if (std::find(blob.begin(), blob.end(), &b) != blob.end()) continue;
                for (const ActiveBurst* member : blob) {
                    if (b.start < member->end && member->start < b.end) {
                        blob.push_back(&b);
                        grew = true;
                        break;
                    }
                }
            }
        }
        MicrosTime blob_end = 0;
        std::uint64_t blob_key = blob.front()->id;
        for (const ActiveBurst* member : blob) {
            blob_end = std::max(blob_end, member->end);
            blob_key = std::min(blob_key, member->id);
        }
        if (blob_end > event.time) return;  // a later member delivers the whole blob

        for (ActiveBurst* member : blob) member->delivered = true;
        if (blob.size() > 1) ++metrics().overlap_events;

        PulseTrain on_air;
        if (blob.size() == 1) {
            on_air = blob.front()->train;
        } else {
            std::vector<const PulseTrain*> group;
            for (const ActiveBurst* member : blob) group.push_back(&member->train);
            on_air = merge_trains(group);
        }

        for (auto& [id, rt] : nodes_) {
            if (blob.size() == 1 && blob.front()->node == id) continue;  // own lone burst
            if (!rt.cap.mcu_on || !rt.listening) continue;
            auto rng = make_rng(seed_, rng_stream::channel, blob_key, id);
            const PulseTrain received = impair(on_air, sc_.channel, rng);
            const auto decoded = decode(received, roster_);
            if (decoded && decoded->node.id != id) {
                ++metrics().decoded_bursts;
                trace(event.time, EventKind::DecodeComplete, id,
                      std::string("result=ok;from=") + std::to_string(decoded->node.id) +
                          ";level=" + to_string(decoded->level));
                const auto period_us = static_cast<MicrosTime>(
                    std::llround(nodes_.at(decoded->node.id).spec.period_ms * 1e3));
                on_burst_received(decoded, rt.table, event.time, period_us);
                maybe_engage(rt, decoded->node.id, event.time, blob.size() > 1);
            } else {
                ++metrics().corrupted_bursts;
                trace(event.time, EventKind::DecodeComplete, id, "result=corrupted");
            }
        }

        std::erase_if(bursts_, [&](const ActiveBurst& b) {
            return b.delivered && b.end + 1'000'000 < event.time;
        });
    }

    void maybe_engage(NodeRt& rt, int from_node, MicrosTime now, bool from_overlap) {
        if (sc_.mode == ProtocolMode::Baseline) return;
        if (std::find(rt.targets.begin(), rt.targets.end(), from_node) == rt.targets.end()) return;
        if (now < rt.busy_until) return;
        const Decision decision =
            decide_transmit(rt.cap.energy_fraction, from_node, rt.table, sc_.mode, sc_.costs, now);
        if (!decision.engage) {
            ++metrics().postpone_breakdown[to_string(decision.reason)];
            trace(now, EventKind::TxDecision, rt.spec.id,
                  std::string("decision=Postpone;reason=") + to_string(decision.reason) +
                      ";target=" + std::to_string(from_node));
            return;
        }
        if (from_overlap) ++metrics().engage_from_overlap;
        trace(now, EventKind::TxDecision, rt.spec.id,
              "decision=Engage;target=" + std::to_string(from_node));
        if (sc_.mode == ProtocolMode::Trap) {
            do_data_tx(rt, nodes_.at(from_node), now);
        } else {
            auto rng = make_rng(seed_, rng_stream::backoff, ++csma_counter_);
            const BackoffRange range{static_cast<MicrosTime>(std::llround(sc_.backoff_min_ms * 1e3)),
                                     static_cast<MicrosTime>(std::llround(sc_.backoff_max_ms * 1e3))};
            std::uniform_int_distribution<MicrosTime> dist(range.min_us, range.max_us);
            const MicrosTime tx_time = now + dist(rng);
            rt.busy_until = tx_time;  // no second engage during the back-off
            Event start{tx_time, rt.spec.id, EventKind::DataTxStart};
            start.peer = from_node;
            start.decision_time = now;
            schedule(start);
            refresh_listening(rt, now);
        }
    }

    bool channel_active_during(MicrosTime from, MicrosTime to) const {
        for (const DataTxRecord& tx : tx_log_) {
            if (tx.start < to && tx.end > from) return true;
        }
        return false;
    }

    bool channel_busy_at(MicrosTime now) const {
        for (const DataTxRecord& tx : tx_log_) {
            if (tx.start <= now && now < tx.end) return true;
        }
        return false;
    }

    void on_data_tx_start(const Event& event) {
        // Scheduled starts exist only in CSMA mode: carrier sense first.
        NodeRt& sender = nodes_.at(event.node);
        if (channel_active_during(event.decision_time, event.time)) {
            ++metrics().csma_aborts;
            trace(event.time, EventKind::TxDecision, sender.spec.id,
                  "decision=CsmaAbort;target=" + std::to_string(event.peer));
            sender.busy_until = event.time;
            refresh_listening(sender, event.time);
            return;
        }
        if (sender.cap.energy_fraction < sc_.costs.tx_cost) {
            ++metrics().postpone_breakdown[to_string(PostponeReason::SelfLow)];
            trace(event.time, EventKind::TxDecision, sender.spec.id,
                  "decision=Postpone;reason=SelfLow;target=" + std::to_string(event.peer));
            refresh_listening(sender, event.time);
            return;
        }
        do_data_tx(sender, nodes_.at(event.peer), event.time);
    }

    void do_data_tx(NodeRt& sender, NodeRt& receiver, MicrosTime now) {
        const bool collision = channel_busy_at(now);
        const DeliveryResult result =
            execute_data_tx(sender.cap, receiver.cap, sc_.costs, collision);
        const MicrosTime end = now + tx_duration_us_;

        DataTxRecord record;
        record.sender = sender.spec.id;
        record.receiver = receiver.spec.id;
        record.start = now;
        record.end = end;
        record.success = result.success;
        record.outcome = result.success ? "Success" : to_string(result.failure);

        ++metrics().tx_actions;
        trace(now, EventKind::DataTxStart, sender.spec.id,
              "receiver=" + std::to_string(receiver.spec.id));

        sender.cap = result.sender;
        sender.busy_until = end;
        if (!sender.cap.mcu_on) note_power_fail(sender, now);
        if (result.success) {
            ++metrics().successful_receptions;
            receiver.cap = result.receiver;
            receiver.busy_until = end;
            if (!receiver.cap.mcu_on) note_power_fail(receiver, now);
        } else {
            ++metrics().failure_breakdown[to_string(result.failure)];
        }

        tx_log_.push_back(record);
        Event done{end, sender.spec.id, EventKind::DataTxEnd};
        done.peer = receiver.spec.id;
        done.tx_index = static_cast<int>(tx_log_.size()) - 1;
        schedule(done);

        refresh_listening(sender, now);
        refresh_listening(receiver, now);
    }

    void on_data_tx_end(const Event& event) {
        const DataTxRecord& record = tx_log_.at(static_cast<std::size_t>(event.tx_index));
        trace(event.time, EventKind::DataTxEnd, event.node,
              "receiver=" + std::to_string(event.peer) + ";outcome=" + record.outcome);
        refresh_listening(nodes_.at(event.node), event.time);
        refresh_listening(nodes_.at(event.peer), event.time);
    }

    void finalize_metrics() {
        Metrics& m = metrics();
        m.simulated_minutes = sc_.duration_s / 60.0;
        m.success_rate =
            m.tx_actions > 0 ? static_cast<double>(m.successful_receptions) / m.tx_actions : 0.0;
        m.throughput_per_min =
            m.simulated_minutes > 0 ? m.successful_receptions / m.simulated_minutes : 0.0;
        MicrosTime listening_us = 0;
        for (const auto& [id, rt] : nodes_) listening_us += rt.listening_total_us;
        m.listening_time_s = static_cast<double>(listening_us) * 1e-6;
        m.listening_energy_uj = m.listening_time_s * kListeningPowerUw;
    }

    const Scenario& sc_;
    std::uint64_t seed_;
    MicrosTime duration_us_ = 0;
    MicrosTime tx_duration_us_ = 0;
    std::map<int, NodeRt> nodes_;
    std::vector<NodeId> roster_;
    std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
    std::vector<ActiveBurst> bursts_;
    std::vector<DataTxRecord> tx_log_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_burst_id_ = 1;
    std::uint64_t csma_counter_ = 0;
    RunResult result_;
};

}  // namespace

RunResult run(const Scenario& scenario, std::uint64_t seed) {
    validate(scenario);
    Engine engine(scenario, seed);
    return engine.run();
}

PairedResult run_paired(const Scenario& scenario, std::uint64_t seed) {
    Scenario trap_arm = scenario;
    trap_arm.mode = ProtocolMode::Trap;
    Scenario baseline_arm = scenario;
    baseline_arm.mode = ProtocolMode::Baseline;
    PairedResult paired;
    paired.trap = run(trap_arm, seed).metrics;
    paired.baseline = run(baseline_arm, seed).metrics;
    return paired;
}

namespace {

void accumulate(std::map<std::string, std::vector<double>>& samples, const Metrics& m) {
    samples["tx_actions"].push_back(m.tx_actions);
    samples["successful_receptions"].push_back(m.successful_receptions);
    samples["success_rate"].push_back(m.success_rate);
    samples["throughput_per_min"].push_back(m.throughput_per_min);
    samples["corrupted_bursts"].push_back(m.corrupted_bursts);
    samples["overlap_events"].push_back(m.overlap_events);
}

nlohmann::json mean_std(const std::vector<double>& values) {
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return nlohmann::json{{"mean", mean}, {"std", std::sqrt(var)}};
}

}  // namespace

nlohmann::json sweep(const nlohmann::json& scenario_template, const std::vector<SweepAxis>& axes,
                     const std::vector<std::uint64_t>& seeds) {
    if (axes.empty() || seeds.empty()) {
        throw ValidationError("sweep needs at least one axis and one seed");
    }
    std::vector<std::size_t> index(axes.size(), 0);
    nlohmann::json cells = nlohmann::json::array();
    bool done = false;
    while (!done) {
        nlohmann::json doc = scenario_template;
        nlohmann::json params;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            doc[nlohmann::json::json_pointer(axes[a].pointer)] = axes[a].values[index[a]];
            params[axes[a].pointer] = axes[a].values[index[a]];
        }
        const Scenario scenario = parse_scenario(doc);
        std::map<std::string, std::vector<double>> samples;
        for (std::uint64_t seed : seeds) accumulate(samples, run(scenario, seed).metrics);
        nlohmann::json stats;
        for (const auto& [name, values] : samples) stats[name] = mean_std(values);
        cells.push_back({{"params", params}, {"seeds", seeds.size()}, {"metrics", stats}});

        std::size_t a = 0;
        for (; a < axes.size(); ++a) {
            if (++index[a] < axes[a].values.size()) break;
            index[a] = 0;
        }
        done = a == axes.size();
    }
    return nlohmann::json{{"cells", cells}};
}

}  // namespace trapsim
