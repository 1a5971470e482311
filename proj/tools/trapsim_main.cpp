#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trapsim/sim_engine.hpp"

using nlohmann::json;

namespace {

// Accepts "90s", "60m", "1.5h" or a plain number of seconds.
double parse_duration_s(const std::string& text) {
    std::size_t pos = 0;
    const double value = std::stod(text, &pos);
    const std::string unit = text.substr(pos);
    if (unit.empty() || unit == "s") return value;
    if (unit == "m") return value * 60.0;
    if (unit == "h") return value * 3600.0;
    throw trapsim::ValidationError("unknown duration unit: " + unit);
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("TRAPSIM_SEED")) {
        return std::stoull(env);
    }
    return 1;
}

void write_json(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw trapsim::ValidationError("cannot write " + path);
    out << doc.dump(2) << '\n';
}

void write_trace(const trapsim::Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw trapsim::ValidationError("cannot write " + path);
    trapsim::write_trace_csv(trace, out);
}

struct ArmStats {
    double tx_mean = 0, tx_std = 0;
    double rate_mean = 0, rate_std = 0;
    double tput_mean = 0, tput_std = 0;
};

ArmStats collect(const std::vector<json>& arms) {
    std::vector<double> tx, rate, tput;
    for (const json& m : arms) {
        tx.push_back(m.at("tx_actions").get<double>());
        rate.push_back(m.at("success_rate").get<double>());
        tput.push_back(m.at("throughput_per_min").get<double>());
    }
    auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0;
        for (double x : v) var += (x - mean) * (x - mean);
        sd = std::sqrt(var / static_cast<double>(v.size()));
    };
    ArmStats out;
    stats(tx, out.tx_mean, out.tx_std);
    stats(rate, out.rate_mean, out.rate_std);
    stats(tput, out.tput_mean, out.tput_std);
    return out;
}

void report_table4(const std::vector<std::string>& paths) {
    std::vector<json> trap, baseline;
    for (const std::string& path : paths) {
        std::ifstream in(path);
        if (!in) throw trapsim::ValidationError("cannot open summary " + path);
        json doc;
        in >> doc;
        trap.push_back(doc.at("trap"));
        baseline.push_back(doc.at("baseline"));
    }
    const ArmStats b = collect(baseline);
    const ArmStats t = collect(trap);
    std::printf("Comparison over %zu paired run(s), simulated vs. reference testbed\n", paths.size());
    std::printf("%-28s %18s %12s\n", "", "simulated", "reference");
    std::printf("-- Without TRAP --\n");
    std::printf("%-28s %9.1f +- %5.1f %12s\n", "Transmission actions", b.tx_mean, b.tx_std, "29");
    std::printf("%-28s %8.1f%% +- %4.1f %12s\n", "Successful reception rate", 100 * b.rate_mean,
                100 * b.rate_std, "31%");
    std::printf("%-28s %9.2f +- %5.2f %12s\n", "Network throughput [p/min]", b.tput_mean, b.tput_std,
                "0.15");
    std::printf("-- With TRAP --\n");
    std::printf("%-28s %9.1f +- %5.1f %12s\n", "Transmission actions", t.tx_mean, t.tx_std, "21");
    std::printf("%-28s %8.1f%% +- %4.1f %12s\n", "Successful reception rate", 100 * t.rate_mean,
                100 * t.rate_std, "100%");
    std::printf("%-28s %9.2f +- %5.2f %12s\n", "Network throughput [p/min]", t.tput_mean, t.tput_std,
                "0.35");
}

std::vector<trapsim::SweepAxis> load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw trapsim::ParseError("cannot open grid file " + path);
    json doc;
    in >> doc;
    std::vector<trapsim::SweepAxis> axes;
    for (const json& axis : doc.at("axes")) {
        trapsim::SweepAxis a;
        a.pointer = axis.at("pointer").get<std::string>();
        for (const json& v : axis.at("values")) a.values.push_back(v);
        axes.push_back(std::move(a));
    }
    return axes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator for energy-status backscatter bursts and the TRAP engage/postpone protocol"};
    app.require_subcommand(1);

    std::string scenario_path, trace_path, grid_path;
    std::string summary_path = "summary.json";
    std::string mode_override, duration_override;
    std::uint64_t seed = default_seed();
    int seeds_per_cell = 1;
    bool quiet = false;
    std::vector<std::string> report_paths;

    auto add_common = [&](CLI::App* cmd, bool with_mode) {
        cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        cmd->add_option("--seed", seed, "RNG seed (fallback: TRAPSIM_SEED, then 1)");
        cmd->add_option("--duration", duration_override, "override duration, e.g. 60m / 90s / 1h");
        cmd->add_option("--summary", summary_path, "summary JSON output path");
        cmd->add_option("--trace", trace_path, "trace CSV output path");
        cmd->add_flag("--quiet", quiet, "suppress stdout report");
        if (with_mode) cmd->add_option("--mode", mode_override, "trap|baseline|csma");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "single simulation run");
    add_common(cmd_run, true);
    CLI::App* cmd_paired = app.add_subcommand("paired", "trap vs. baseline on one energy profile");
    add_common(cmd_paired, false);
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "parameter grid sweep");
    add_common(cmd_sweep, false);
    cmd_sweep->add_option("--grid", grid_path, "grid JSON: {\"axes\":[{\"pointer\",\"values\"}]}")
        ->required();
    cmd_sweep->add_option("--seeds-per-cell", seeds_per_cell, "seeds per grid cell");
    CLI::App* cmd_report = app.add_subcommand("report", "testbed comparison table from paired summaries");
    cmd_report->add_option("summaries", report_paths, "paired summary JSON files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_report->parsed()) {
            report_table4(report_paths);
            return 0;
        }

        trapsim::Scenario scenario = trapsim::load_scenario(scenario_path);
        if (!mode_override.empty()) scenario.mode = trapsim::parse_mode(mode_override);
        if (!duration_override.empty()) scenario.duration_s = parse_duration_s(duration_override);
        trapsim::validate(scenario);

        if (cmd_run->parsed()) {
            const trapsim::RunResult result = trapsim::run(scenario, seed);
            const json summary{{"command", "run"},
                               {"mode", trapsim::to_string(scenario.mode)},
                               {"seed", seed},
                               {"metrics", trapsim::to_json(result.metrics)}};
            write_json(summary, summary_path);
            if (!trace_path.empty()) write_trace(result.trace, trace_path);
            if (!quiet) std::cout << summary.dump(2) << '\n';
        } else if (cmd_paired->parsed()) {
            const trapsim::PairedResult paired = trapsim::run_paired(scenario, seed);
            const json summary{{"command", "paired"},
                               {"seed", seed},
                               {"trap", trapsim::to_json(paired.trap)},
                               {"baseline", trapsim::to_json(paired.baseline)}};
            write_json(summary, summary_path);
            if (!trace_path.empty()) {
                trapsim::Scenario trap_arm = scenario;
                trap_arm.mode = trapsim::ProtocolMode::Trap;
                write_trace(trapsim::run(trap_arm, seed).trace, trace_path);
            }
            if (!quiet) std::cout << summary.dump(2) << '\n';
        } else if (cmd_sweep->parsed()) {
            const auto axes = load_grid(grid_path);
            std::vector<std::uint64_t> seeds;
            for (int i = 0; i < seeds_per_cell; ++i) seeds.push_back(seed + static_cast<std::uint64_t>(i));
            const json summary = trapsim::sweep(trapsim::to_json(scenario), axes, seeds);
            write_json(summary, summary_path);
            if (!quiet) std::cout << summary.dump(2) << '\n';
        }
        return 0;
    } catch (const trapsim::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const trapsim::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
