// Entanglement distribution over a time-varying LEO constellation: snapshot
// extraction, space-time routing, and Monte Carlo protocol simulation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "leoq/config.hpp"

namespace fs = std::filesystem;
using namespace leoq;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    long seed = -1; // -1: take the config's seed
    int threads = 0;
};

Scenario load(const CommonOpts& o) {
    Scenario sc = load_scenario(o.config_path);
    if (o.seed >= 0) sc.seed = static_cast<std::uint64_t>(o.seed);
    sc.threads = o.threads;
    return sc;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw std::runtime_error("cannot create output directory: " + dir);
}

int cmd_snapshots(const CommonOpts& o) {
    Scenario sc = load(o);
    ensure_out_dir(o.out_dir);
    double t0 = sc.transmission_times.front();
    TopologyBuild topo = build_schedule(sc.constellation, sc.sites, t0,
                                        sc.memory.t_c + sc.horizon_margin, sc.sample_dt,
                                        sc.max_range_m);
    DownlinkOutageCache cache(sc.physics);
    SpaceTimeGraph g = build_spacetime_graph(sc.constellation, sc.sites, topo, sc.physics,
                                             sc.memory, sc.weight_fidelity, sc.weight_memory,
                                             &cache);
    write_file(o.out_dir + "/snapshots.txt", dump_snapshots(topo, sc.sites));
    write_file(o.out_dir + "/spacetime.txt", dump_spacetime(g, sc.sites));
    std::cout << "snapshots: " << topo.snapshots.size() << " slots over ["
              << fmt9(topo.schedule.transition_points.front()) << ", "
              << fmt9(topo.schedule.transition_points.back()) << ") -> " << o.out_dir << "\n";
    return 0;
}

int cmd_route(const CommonOpts& o, const std::string& source, const std::string& dest,
              double t_start) {
    Scenario sc = load(o);
    ensure_out_dir(o.out_dir);
    NodeId src, dst;
    try {
        src = parse_node(sc.constellation, sc.sites, source);
        dst = parse_node(sc.constellation, sc.sites, dest);
        if (src == dst) throw std::invalid_argument("source equals destination");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    TopologyBuild topo = build_schedule(sc.constellation, sc.sites, t_start,
                                        sc.memory.t_c + sc.horizon_margin, sc.sample_dt,
                                        sc.max_range_m);
    DownlinkOutageCache cache(sc.physics);
    SpaceTimeGraph g = build_spacetime_graph(sc.constellation, sc.sites, topo, sc.physics,
                                             sc.memory, sc.weight_fidelity, sc.weight_memory,
                                             &cache);
    PathQuery q{src, dst, t_start, sc.memory.t_c};
    auto path = optimal_entanglement_path(g, topo.schedule, q, sc.physics.fidelity_threshold);
    std::string dump = dump_path(path ? &*path : nullptr, sc.sites);
    write_file(o.out_dir + "/path.txt", dump);
    std::cout << dump;
    return 0;
}

int cmd_simulate(const CommonOpts& o) {
    Scenario sc = load(o);
    ensure_out_dir(o.out_dir);
    SweepResult res = run_sweep(sc, sc.memory.t_c, 0, true);
    write_file(o.out_dir + "/metrics.csv", metrics_csv(res.records));
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const MetricsRecord& r = res.records[i];
        std::string tag = "point_" + std::to_string(i / 2) + "_" +
                          strategy_name(r.strategy);
        write_file(o.out_dir + "/outcomes_" + tag + ".log", res.outcome_logs[i]);
        std::cout << tag << " t=" << fmt9(r.transmission_time)
                  << " drop_rate=" << fmt9(r.drop_rate) << " throughput=" << fmt9(r.throughput)
                  << " fidelity=" << fmt9(r.mean_fidelity) << " path=" << (r.path_found ? 1 : 0)
                  << "\n";
    }
    return 0;
}

int cmd_sweep_coherence(const CommonOpts& o) {
    Scenario sc = load(o);
    if (sc.coherence_sweep.empty())
        throw ConfigError("simulation.coherence_sweep_seconds is empty");
    ensure_out_dir(o.out_dir);
    for (std::size_t ci = 0; ci < sc.coherence_sweep.size(); ++ci) {
        double tc = sc.coherence_sweep[ci];
        SweepResult res = run_sweep(sc, tc, static_cast<int>(ci), false);
        std::string name = o.out_dir + "/metrics_tc" + fmt9(tc) + ".csv";
        write_file(name, metrics_csv(res.records));
        std::cout << "t_c=" << fmt9(tc) << " -> " << name << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entanglement distribution simulator for LEO constellations"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string source, dest;
    double t_start = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "configuration file")->required();
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--seed", opts.seed, "override the config seed");
        sub->add_option("--threads", opts.threads, "worker threads (0 = machine parallelism)");
    };

    CLI::App* snap = app.add_subcommand("snapshots", "dump snapshots and the space-time graph");
    add_common(snap);
    CLI::App* route = app.add_subcommand("route", "find the optimal entanglement path");
    add_common(route);
    route->add_option("--source", source, "source node (sat-<i> or ground-<name>)")->required();
    route->add_option("--dest", dest, "destination node")->required();
    route->add_option("--t-start", t_start, "transmission start time, seconds");
    CLI::App* sim = app.add_subcommand("simulate", "run the transmission-time sweep");
    add_common(sim);
    CLI::App* sweep = app.add_subcommand("sweep-coherence", "re-run the sweep per coherence time");
    add_common(sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        if (snap->parsed()) return cmd_snapshots(opts);
        if (route->parsed()) return cmd_route(opts, source, dest, t_start);
        if (sim->parsed()) return cmd_simulate(opts);
        if (sweep->parsed()) return cmd_sweep_coherence(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
