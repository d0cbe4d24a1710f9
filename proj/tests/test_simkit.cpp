#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "leoq/simkit.hpp"

using namespace leoq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// 8-satellite ring: static topology, neighbors visible, everything else
// blocked by the Earth.
Scenario ring_scenario() {
    Scenario sc;
    sc.constellation.num_planes = 1;
    sc.constellation.sats_per_plane = 8;
    sc.constellation.altitude_m = 550e3;
    sc.constellation.inclination_rad = 0.9;
    sc.physics.d_ref_m = 6000e3;
    sc.memory.t_c = 300.0;
    sc.protocol.t_bsm = 1.0;
    sc.source = {NodeKind::Satellite, 0};
    sc.destination = {NodeKind::Satellite, 2};
    sc.max_range_m = 6000e3;
    sc.sample_dt = 10.0;
    sc.horizon_margin = 30.0;
    sc.transmission_times = {0.0};
    sc.attempts = 2000;
    sc.seed = 42;
    sc.channel_sampling = false;
    return sc;
}

long count_outcomes(const std::string& log, const std::string& code) {
    std::istringstream is(log);
    std::string line;
    long n = 0;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string attempt, path, outcome;
        ls >> attempt >> path >> outcome;
        if (outcome == code) ++n;
    }
    return n;
}

} // namespace

TEST_CASE("ideal static scenario delivers everything") {
    Scenario sc = ring_scenario();
    sc.protocol.p_source = 1.0;
    sc.protocol.p_bsm = 1.0;
    sc.protocol.p_mem_fail = 0.0;
    sc.memory.t_c = 1e15;

    MetricsRecord r = run_point(sc, 0.0, Strategy::Stbd, 1);
    CHECK(r.path_found);
    CHECK(r.drop_rate == 0.0);
    CHECK(r.throughput == sc.protocol.rate);
    CHECK_THAT(r.mean_fidelity, WithinAbs(1.0, 1e-9));
    CHECK(r.hop_count == 2);
    CHECK(r.end_slot == 1);
}

TEST_CASE("never-connected endpoints record a zero-fidelity no-path point") {
    Scenario sc;
    sc.constellation.num_planes = 1;
    sc.constellation.sats_per_plane = 2; // antipodal pair, always blocked
    sc.constellation.altitude_m = 550e3;
    sc.constellation.inclination_rad = 0.9;
    sc.memory.t_c = 100.0;
    sc.horizon_margin = 20.0;
    sc.source = {NodeKind::Satellite, 0};
    sc.destination = {NodeKind::Satellite, 1};
    sc.transmission_times = {0.0};
    sc.attempts = 50;

    std::string log;
    MetricsRecord r = run_point(sc, 0.0, Strategy::Stbd, 1, &log);
    CHECK_FALSE(r.path_found);
    CHECK(r.mean_fidelity == 0.0);
    CHECK(r.drop_rate == sc.protocol.rate);
    CHECK(r.throughput == 0.0);
    CHECK(count_outcomes(log, "NO_PATH") == 50);
}

TEST_CASE("fixed seed reproduces records bit for bit") {
    Scenario sc = ring_scenario();
    MetricsRecord a = run_point(sc, 0.0, Strategy::Stbd, 5);
    MetricsRecord b = run_point(sc, 0.0, Strategy::Stbd, 5);
    CHECK(a.drop_rate == b.drop_rate);
    CHECK(a.throughput == b.throughput);
    CHECK(a.mean_fidelity == b.mean_fidelity);
}

TEST_CASE("sweep output is independent of thread count") {
    Scenario sc = ring_scenario();
    sc.transmission_times = {0.0, 40.0};
    sc.attempts = 300;

    sc.threads = 1;
    SweepResult serial = run_sweep(sc, sc.memory.t_c, 0, true);
    sc.threads = 4;
    SweepResult parallel = run_sweep(sc, sc.memory.t_c, 0, true);

    CHECK(metrics_csv(serial.records) == metrics_csv(parallel.records));
    REQUIRE(serial.outcome_logs.size() == parallel.outcome_logs.size());
    for (std::size_t i = 0; i < serial.outcome_logs.size(); ++i)
        CHECK(serial.outcome_logs[i] == parallel.outcome_logs[i]);
}

TEST_CASE("aggregates recompute from the outcome log") {
    Scenario sc = ring_scenario();
    sc.attempts = 500;
    std::string log;
    MetricsRecord r = run_point(sc, 0.0, Strategy::Stbd, 3, &log);
    long ok = count_outcomes(log, "OK");
    CHECK(r.throughput == sc.protocol.rate * static_cast<double>(ok) / sc.attempts);
    CHECK(r.drop_rate ==
          sc.protocol.rate * static_cast<double>(sc.attempts - ok) / sc.attempts);
}

TEST_CASE("empirical drop fraction matches the analytic product") {
    Scenario sc = ring_scenario();
    sc.physics.d_ref_m = 4000e3; // neighbor hops land eta in (0,1)
    sc.attempts = 20000;

    TopologyBuild topo = build_schedule(sc.constellation, sc.sites, 0.0,
                                        sc.memory.t_c + sc.horizon_margin, sc.sample_dt,
                                        sc.max_range_m);
    auto g = build_spacetime_graph(sc.constellation, sc.sites, topo, sc.physics, sc.memory,
                                   0.5, 0.5);
    PathQuery q{sc.source, sc.destination, 0.0, sc.memory.t_c};
    auto path = optimal_entanglement_path(g, topo.schedule, q, sc.physics.fidelity_threshold);
    REQUIRE(path);
    double expect = success_probability(path->hop_count() + 1, sc.protocol);
    for (const auto& e : path->edges) {
        if (!e.temporal)
            expect *= clamp_probability(
                transmittance(e.distance_m, e.link_kind, 1.0, 1.0, sc.physics));
    }

    MetricsRecord r = run_point(sc, 0.0, Strategy::Stbd, 9);
    double emp = r.throughput / sc.protocol.rate;
    double se = std::sqrt(expect * (1 - expect) / sc.attempts);
    CHECK(std::abs(emp - expect) < 3.0 * se);
}

TEST_CASE("stbd subsumes the baseline on the walker constellation") {
    Scenario sc;
    sc.constellation.num_planes = 20;
    sc.constellation.sats_per_plane = 8;
    sc.constellation.altitude_m = 550e3;
    sc.constellation.inclination_rad = 60.0 * 3.14159265358979 / 180.0;
    sc.physics.d_ref_m = 5000e3;
    sc.memory.t_c = 300.0;
    sc.horizon_margin = 30.0;
    sc.source = {NodeKind::Satellite, 3};
    sc.destination = {NodeKind::Satellite, 13};
    sc.transmission_times = {0.0};
    sc.attempts = 200;

    for (double t : {0.0, 120.0}) {
        MetricsRecord stbd = run_point(sc, t, Strategy::Stbd, 11);
        MetricsRecord base = run_point(sc, t, Strategy::BaselineDynamic, 12);
        if (base.path_found) {
            REQUIRE(stbd.path_found);
            CHECK(stbd.path_utility >= base.path_utility);
        }
    }
}

TEST_CASE("metrics CSV carries the contract header and 9-digit values") {
    MetricsRecord r;
    r.transmission_time = 123.456789123;
    r.strategy = Strategy::BaselineDynamic;
    r.drop_rate = 1.0 / 3.0;
    r.throughput = 2.0 / 3.0;
    r.mean_fidelity = 0.987654321987;
    r.path_found = true;
    r.end_slot = 4;
    r.hop_count = 7;
    std::string csv = metrics_csv({r});
    CHECK(csv.find("transmission_time,strategy,drop_rate,throughput,mean_fidelity,"
                   "path_found,end_slot,hop_count\n") == 0);
    CHECK(csv.find("123.456789,BaselineDynamic,0.333333333,0.666666667,0.987654322,1,4,7\n") !=
          std::string::npos);
}
