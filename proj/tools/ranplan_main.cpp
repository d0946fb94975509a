// ranplan: RF planning, TDD capacity and FAPI slot-procedure simulation for
// private 5G deployments. Subcommands: plan, capacity, simulate, analyze.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ranplan/capacity.hpp"
#include "ranplan/linkbudget.hpp"
#include "ranplan/measure.hpp"
#include "ranplan/pcap.hpp"
#include "ranplan/placement.hpp"
#include "ranplan/raytrace.hpp"
#include "ranplan/scenario.hpp"
#include "ranplan/scene.hpp"
#include "ranplan/slotsim.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ranplan;

struct CommonOpts {
    std::string scenario_path;
    std::string out;
    std::string sweep;
    std::string combine;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool machine = false;
    unsigned threads = 0;
};

Scenario load_or_default(const std::string& path) {
    if (path.empty()) return Scenario::defaults();
    return load_scenario(path);
}

std::vector<double> parse_sweep(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        values.push_back(std::stod(item));
    }
    if (values.empty()) throw ConfigError("empty attenuation sweep list");
    return values;
}

void apply_overrides(Scenario& scenario, const CommonOpts& opts) {
    if (!opts.sweep.empty()) scenario.attenuation_sweep_db = parse_sweep(opts.sweep);
    if (!opts.combine.empty()) {
        if (opts.combine == "coherent")
            scenario.trace.combine_mode = CombineMode::Coherent;
        else if (opts.combine == "power")
            scenario.trace.combine_mode = CombineMode::PowerSum;
        else
            throw ConfigError("--combine must be 'coherent' or 'power'");
    }
    if (opts.seed_set) scenario.sim.seed = opts.seed;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

int cmd_plan(const CommonOpts& opts) {
    Scenario scenario = load_or_default(opts.scenario_path);
    apply_overrides(scenario, opts);

    const Scene scene = scenario.load_scene_or_free_space();
    const auto ru_points = scenario.resolve_ru_points();
    const auto ue_points = scenario.resolve_ue_points();
    if (ru_points.size() < 2)
        throw ConfigError("need >=2 RU locations for pair search (got " +
                          std::to_string(ru_points.size()) + ")");

    const fs::path out_dir = opts.out.empty() ? fs::path("out") : fs::path(opts.out);
    fs::create_directories(out_dir);

    std::cerr << "tracing " << ru_points.size() << " x " << ue_points.size()
              << " pairs over " << scene.facets.size() << " facets...\n";
    const ChannelMatrix channel =
        build_channel_matrix(scene, ru_points, ue_points, scenario.trace, opts.threads);

    {
        std::ostringstream csv;
        export_channel_csv(channel, csv);
        write_file(out_dir / "channel_matrix.csv", csv.str());
    }
    {
        const std::vector<RuConfig> rus(ru_points.size(), scenario.ru_config);
        const RssiMatrix rssi = build_rssi_matrix(channel, rus, scenario.ue_config);
        std::ostringstream csv;
        export_rssi_csv(rssi, csv);
        write_file(out_dir / "rssi_matrix.csv", csv.str());
    }

    const SweepResult sweep =
        sweep_attenuation(channel, scenario.ru_config, scenario.ue_config, scenario.noise,
                          scenario.attenuation_sweep_db, scenario.score);

    std::ostringstream tables;
    bool header = true;
    std::ostringstream summary;
    summary << "A_RU [dB] | best pair | pair [min, max] E(SINR) [dB] | table [min, max] [dB]\n";
    summary << "----------+-----------+------------------------------+---------------------\n";
    char line[256];
    for (std::size_t k = 0; k < sweep.tables.size(); ++k) {
        const ScoreTable& table = sweep.tables[k];
        export_score_table_csv(table, tables, header);
        header = false;

        std::ostringstream heat;
        export_heatmap(table, static_cast<int>(ru_points.size()), true, heat);
        if (table.attenuation_db == std::floor(table.attenuation_db))
            std::snprintf(line, sizeof(line), "heatmap_att%02d.csv",
                          static_cast<int>(table.attenuation_db));
        else
            std::snprintf(line, sizeof(line), "heatmap_att%g.csv", table.attenuation_db);
        write_file(out_dir / line, heat.str());

        const ScoreRow& best = table.best();
        double table_lo = best.score_db, table_hi = best.score_db;
        for (const auto& row : table.rows) {
            table_lo = std::min(table_lo, row.score_db);
            table_hi = std::max(table_hi, row.score_db);
        }
        std::snprintf(line, sizeof(line),
                      "%9g | [%d, %d] | [%.2f, %.2f] | [%.2f, %.2f]\n", table.attenuation_db,
                      best.deployment.ru_indices[0] + 1, best.deployment.ru_indices[1] + 1,
                      best.min_db, best.max_db, table_lo, table_hi);
        summary << line;
    }
    write_file(out_dir / "score_table.csv", tables.str());
    write_file(out_dir / "best_pairs.txt", summary.str());

    std::cout << summary.str();
    std::cout << "wrote " << out_dir.string() << "/channel_matrix.csv, rssi_matrix.csv, "
              << sweep.tables.size() << " heatmaps, score_table.csv, best_pairs.txt\n";
    return 0;
}

int cmd_capacity(const CommonOpts& opts) {
    const Scenario scenario = load_or_default(opts.scenario_path);
    print_capacity_summary(scenario.carrier, scenario.tdd, scenario.link, scenario.harq,
                           std::cout, opts.machine);
    return 0;
}

int cmd_simulate(const CommonOpts& opts) {
    Scenario scenario = load_or_default(opts.scenario_path);
    apply_overrides(scenario, opts);

    const Simulator simulator(scenario.sim);
    const SimResult result = simulator.run();

    const std::string pcap_path = opts.out.empty() ? "trace.pcap" : opts.out;
    const std::size_t records = export_pcap(result.trace, pcap_path);

    const SimStats& stats = result.stats;
    char line[256];
    std::snprintf(line, sizeof(line), "slots simulated      %ld (%.3f s)\n",
                  stats.slots_simulated, stats.sim_time_s);
    std::cout << line;
    std::snprintf(line, sizeof(line), "aggregate DL         %.3f Mbps\n",
                  stats.dl_throughput_bps() / 1e6);
    std::cout << line;
    std::snprintf(line, sizeof(line), "aggregate UL         %.3f Mbps\n",
                  stats.ul_throughput_bps() / 1e6);
    std::cout << line;
    for (std::size_t u = 0; u < stats.dl_bits_per_ue.size(); ++u) {
        std::snprintf(line, sizeof(line), "  ue %zu              DL %.3f / UL %.3f Mbps\n", u,
                      static_cast<double>(stats.dl_bits_per_ue[u]) / stats.sim_time_s / 1e6,
                      static_cast<double>(stats.ul_bits_per_ue[u]) / stats.sim_time_s / 1e6);
        std::cout << line;
    }
    std::snprintf(line, sizeof(line), "deadline misses      %ld\n", stats.deadline_misses);
    std::cout << line;
    std::cout << "message counts\n";
    for (const auto& [kind, count] : stats.message_counts)
        std::cout << "  " << fapi_msg_name(kind) << "  " << count << "\n";
    std::cout << "wrote " << records << " records to " << pcap_path << "\n";
    return 0;
}

int cmd_analyze(const std::vector<std::string>& inputs, const CommonOpts& opts) {
    std::vector<StatsRow> rows;
    for (const auto& path : inputs) {
        const IngestResult result = ingest_csv_file(path);
        if (std::holds_alternative<SampleSeries>(result)) {
            const auto& series = std::get<SampleSeries>(result);
            const auto ci = mean_ci(series);
            if (!ci.warning.empty())
                std::cerr << series.label << ": " << ci.warning << "\n";
            rows.push_back({series.label, ci.mean, ci.lo, ci.hi});
        } else {
            const auto& session = std::get<VideoSession>(result);
            const double ratio = rebuffer_ratio(session);
            rows.push_back({session.label + "_rebuffer_ratio", ratio, ratio, ratio});
            if (!session.bitrate_samples_mbps.empty()) {
                SampleSeries bitrate{session.label + "_bitrate_mbps",
                                     session.bitrate_samples_mbps,
                                     static_cast<int>(session.bitrate_samples_mbps.size())};
                const auto ci = mean_ci(bitrate);
                rows.push_back({bitrate.label, ci.mean, ci.lo, ci.hi});
            }
        }
    }

    if (opts.out.empty()) {
        export_stats_csv(rows, std::cout);
    } else {
        std::ostringstream csv;
        export_stats_csv(rows, csv);
        write_file(opts.out, csv.str());
        std::cout << "wrote " << rows.size() << " rows to " << opts.out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RF planning and FAPI slot simulation for private 5G deployments"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<std::string> analyze_inputs;

    auto add_common = [&](CLI::App* cmd, bool with_out) {
        cmd->add_option("--scenario", opts.scenario_path, "scenario JSON file");
        if (with_out) cmd->add_option("--out", opts.out, "output directory or file");
    };

    CLI::App* plan = app.add_subcommand("plan", "score RU placements over a scene");
    add_common(plan, true);
    plan->add_option("--attenuation-sweep", opts.sweep, "comma-separated dB values");
    plan->add_option("--combine", opts.combine, "path combining: coherent|power");
    plan->add_option("--threads", opts.threads, "ray-tracing worker threads (0 = auto)");

    CLI::App* capacity = app.add_subcommand("capacity", "theoretical TDD cell/user throughput");
    add_common(capacity, false);
    capacity->add_flag("--machine", opts.machine, "flat key=value output");

    CLI::App* simulate = app.add_subcommand("simulate", "run the L1/L2 slot exchange");
    add_common(simulate, true);
    simulate->add_option("--seed", opts.seed, "traffic RNG seed")
        ->each([&](const std::string&) { opts.seed_set = true; });

    CLI::App* analyze = app.add_subcommand("analyze", "mean/CI statistics from sample CSVs");
    analyze->add_option("inputs", analyze_inputs, "input CSV files")->required();
    analyze->add_option("--out", opts.out, "output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (plan->parsed()) return cmd_plan(opts);
        if (capacity->parsed()) return cmd_capacity(opts);
        if (simulate->parsed()) return cmd_simulate(opts);
        if (analyze->parsed()) return cmd_analyze(analyze_inputs, opts);
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
