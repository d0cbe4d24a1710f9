#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "leoq/protocol.hpp"
#include "leoq/router.hpp"
#include "leoq/textio.hpp"

namespace leoq {

enum class Strategy { Stbd, BaselineDynamic };

inline const char* strategy_name(Strategy s) {
    return s == Strategy::Stbd ? "STBD" : "BaselineDynamic";
}

struct Scenario {
    ConstellationSpec constellation;
    std::vector<GroundSite> sites;
    LinkPhysics physics;
    MemoryModel memory;
    ProtocolParams protocol;
    double weight_fidelity = 0.5;
    double weight_memory = 0.5;
    NodeId source;
    NodeId destination;
    double horizon_margin = 60.0; // snapshot window extends t_c by this margin
    double sample_dt = 10.0;
    double max_range_m = 5000e3;
    std::vector<double> transmission_times;
    std::vector<double> coherence_sweep;
    long attempts = 10000;
    std::uint64_t seed = 42;
    int threads = 0; // 0: machine parallelism
    bool channel_sampling = true;
    SegmentedTrailing trailing = SegmentedTrailing::Literal;

    void validate() const {
        constellation.validate();
        for (const auto& s : sites) s.validate();
        physics.validate();
        memory.validate();
        protocol.validate();
        if (attempts < 1) throw std::invalid_argument("attempts must be >= 1");
        if (!(horizon_margin > 0.0)) throw std::invalid_argument("horizon margin must be positive");
        if (!(sample_dt > 0.0)) throw std::invalid_argument("sample_dt must be positive");
        if (!(max_range_m > 0.0)) throw std::invalid_argument("max range must be positive");
        if (transmission_times.empty())
            throw std::invalid_argument("transmission_times must not be empty");
        for (double t : transmission_times)
            if (t < 0.0) throw std::invalid_argument("transmission times must be nonnegative");
        for (double t : coherence_sweep)
            if (!(t > 0.0)) throw std::invalid_argument("coherence sweep times must be positive");
        if (source == destination) throw std::invalid_argument("endpoints must differ");
    }
};

struct MetricsRecord {
    double transmission_time = 0.0;
    Strategy strategy = Strategy::Stbd;
    double drop_rate = 0.0;
    double throughput = 0.0;
    double mean_fidelity = 0.0;
    bool path_found = false;
    int end_slot = 0;
    int hop_count = 0;
    double path_utility = 0.0; // not part of the CSV contract; used by checks
};

// Build the topology window, route one query, and run the Monte Carlo
// attempts. point_key feeds the per-attempt seed derivation so results do not
// depend on thread count or point execution order.
inline MetricsRecord run_point(const Scenario& sc, double t_start, Strategy strategy,
                               std::uint64_t point_key, std::string* outcome_log = nullptr) {
    MemoryModel mem = sc.memory;
    TopologyBuild topo = build_schedule(sc.constellation, sc.sites, t_start,
                                        mem.t_c + sc.horizon_margin, sc.sample_dt, sc.max_range_m);
    DownlinkOutageCache cache(sc.physics);
    SpaceTimeGraph graph =
        build_spacetime_graph(sc.constellation, sc.sites, topo, sc.physics, mem,
                              sc.weight_fidelity, sc.weight_memory, &cache);

    PathQuery query{sc.source, sc.destination, t_start, mem.t_c};
    double gamma_min = sc.physics.fidelity_threshold;
    std::optional<PathSolution> path =
        strategy == Strategy::Stbd
            ? optimal_entanglement_path(graph, topo.schedule, query, gamma_min)
            : baseline_dynamic_path(graph, topo.schedule, query, gamma_min);

    MetricsRecord rec;
    rec.transmission_time = t_start;
    rec.strategy = strategy;

    if (!path) {
        rec.drop_rate = sc.protocol.rate; // every attempt is a NO_PATH drop
        if (outcome_log) {
            for (long a = 0; a < sc.attempts; ++a)
                *outcome_log += outcome_line(a, -1, {Outcome::NoPath, 0.0});
        }
        return rec;
    }

    rec.path_found = true;
    rec.end_slot = path->end_slot;
    rec.hop_count = path->hop_count();
    rec.path_utility = path->utility;

    SegmentPlan plan = plan_segments(*path, topo.schedule, sc.protocol.t_bsm);
    std::vector<LinkChannel> channels = path_channels(*path);

    long ok = 0;
    double fid = stbd_deterministic(plan, mem, sc.trailing);
    for (long a = 0; a < sc.attempts; ++a) {
        Rng rng = make_rng(sc.seed, point_key, static_cast<std::uint64_t>(a));
        StbdOutcome out = stbd_attempt(plan, channels, sc.protocol, sc.physics, mem, rng,
                                       sc.channel_sampling, sc.trailing);
        if (out.outcome == Outcome::Ok) ++ok;
        if (outcome_log) *outcome_log += outcome_line(a, 0, out);
    }
    long drops = sc.attempts - ok;
    rec.drop_rate = sc.protocol.rate * static_cast<double>(drops) / sc.attempts;
    rec.throughput = sc.protocol.rate * static_cast<double>(ok) / sc.attempts;
    rec.mean_fidelity = fid;
    return rec;
}

struct SweepResult {
    std::vector<MetricsRecord> records;          // transmission_times x strategies, in order
    std::vector<std::string> outcome_logs;       // parallel to records, when requested
};

// Cartesian sweep over transmission times and both strategies at the
// scenario's coherence time. Points are independent; parallel execution
// cannot change any output.
inline SweepResult run_sweep(const Scenario& sc, double t_c, int tc_index,
                             bool want_logs = false) {
    Scenario point_sc = sc;
    point_sc.memory.t_c = t_c;

    struct Job {
        double t_start;
        Strategy strategy;
        std::uint64_t key;
    };
    std::vector<Job> jobs;
    for (std::size_t ti = 0; ti < sc.transmission_times.size(); ++ti) {
        for (Strategy s : {Strategy::Stbd, Strategy::BaselineDynamic}) {
            std::uint64_t key = derive_seed(0x5eedULL, ti, s == Strategy::Stbd ? 0 : 1,
                                            static_cast<std::uint64_t>(tc_index));
            jobs.push_back({sc.transmission_times[ti], s, key});
        }
    }

    SweepResult out;
    out.records.resize(jobs.size());
    out.outcome_logs.resize(want_logs ? jobs.size() : 0);

    int threads = sc.threads > 0 ? sc.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            std::string* log = want_logs ? &out.outcome_logs[j] : nullptr;
            out.records[j] = run_point(point_sc, jobs[j].t_start, jobs[j].strategy, jobs[j].key, log);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

inline const char* kMetricsCsvHeader =
    "transmission_time,strategy,drop_rate,throughput,mean_fidelity,path_found,end_slot,hop_count";

inline std::string metrics_csv(const std::vector<MetricsRecord>& records) {
    std::string s = kMetricsCsvHeader;
    s += '\n';
    for (const auto& r : records) {
        s += fmt9(r.transmission_time);
        s += ',';
        s += strategy_name(r.strategy);
        s += ',';
        s += fmt9(r.drop_rate);
        s += ',';
        s += fmt9(r.throughput);
        s += ',';
        s += fmt9(r.mean_fidelity);
        s += ',';
        s += r.path_found ? '1' : '0';
        s += ',';
        s += std::to_string(r.end_slot);
        s += ',';
        s += std::to_string(r.hop_count);
        s += '\n';
    }
    return s;
}

} // namespace leoq
