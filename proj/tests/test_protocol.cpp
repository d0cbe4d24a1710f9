#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "leoq/protocol.hpp"

using namespace leoq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Event-trace oracle: walks the halving rounds explicitly and emits one decay
// factor per stored qubit, then multiplies the flat factor list. Shares no
// code with the formula implementations.
struct TraceOracle {
    double t_c;

    double decay(double age) const { return std::exp(-age / t_c); }

    double nested(const std::vector<double>& werner, int reps, double tbsm) const {
        std::vector<double> fac(werner);
        int remaining = reps;
        double elapsed = 0.0;
        while (remaining > 0) {
            int ni = (remaining + 1) / 2;
            elapsed += tbsm;
            for (int r = 0; r < ni; ++r) {
                fac.push_back(decay(elapsed)); // two memories per swapping node
                fac.push_back(decay(elapsed));
            }
            remaining -= ni;
        }
        fac.push_back(decay(elapsed)); // both end nodes
        fac.push_back(decay(elapsed));
        double w = 1.0;
        for (double f : fac) w *= f;
        return (1.0 + 3.0 * w) / 4.0;
    }

    double wait_till_end(const std::vector<double>& werner, int reps, double tbsm,
                         const std::vector<double>& starts) const {
        std::vector<double> fac(werner);
        double t0 = starts.front();
        double tf = starts.back();
        int remaining = reps;
        double elapsed = 0.0;
        int round = 0;
        while (remaining > 0) {
            int ni = (remaining + 1) / 2;
            elapsed += tbsm;
            double ti = starts[std::min<std::size_t>(round, starts.size() - 1)];
            for (int r = 0; r < ni; ++r) {
                fac.push_back(decay((tf - ti) + elapsed));
                fac.push_back(decay((tf - ti) + elapsed));
            }
            remaining -= ni;
            ++round;
        }
        fac.push_back(decay(elapsed));
        fac.push_back(decay((tf - t0) + elapsed));
        double w = 1.0;
        for (double f : fac) w *= f;
        return (1.0 + 3.0 * w) / 4.0;
    }

    double segmented(const std::vector<double>& werner, const std::vector<int>& seg_reps,
                     double tbsm, const std::vector<double>& starts, bool literal) const {
        std::vector<double> fac(werner);
        double total = 0.0;
        double last_round_duration = 0.0;
        for (std::size_t k = 0; k < seg_reps.size(); ++k) {
            int remaining = seg_reps[k];
            double elapsed = 0.0;
            while (remaining > 0) {
                int ni = (remaining + 1) / 2;
                elapsed += tbsm;
                for (int r = 0; r < ni; ++r) {
                    fac.push_back(decay(elapsed));
                    fac.push_back(decay(elapsed));
                }
                remaining -= ni;
            }
            double gap = (k + 1 < seg_reps.size()) ? starts[k + 1] - starts[k] : 0.0;
            fac.push_back(decay(gap + elapsed));
            total += elapsed;
            if (k + 1 == seg_reps.size()) last_round_duration = seg_reps[k] > 0 ? tbsm : 0.0;
        }
        fac.push_back(decay(starts.back() - starts.front() + total));
        if (literal) fac.push_back(decay(last_round_duration));
        double w = 1.0;
        for (double f : fac) w *= f;
        return (1.0 + 3.0 * w) / 4.0;
    }
};

SegmentPlan make_plan(const std::vector<double>& werner, const std::vector<int>& seg_reps,
                      double tbsm, const std::vector<double>& starts) {
    SegmentPlan plan;
    plan.link_werner = werner;
    plan.path_nodes = static_cast<int>(werner.size()) + 1;
    for (std::size_t k = 0; k < seg_reps.size(); ++k) {
        Segment seg;
        seg.slot = static_cast<int>(k) + 1;
        seg.start_time = starts[k];
        seg.num_repeaters = seg_reps[k];
        seg.rounds = round_schedule(seg_reps[k], tbsm);
        plan.segments.push_back(seg);
    }
    return plan;
}

} // namespace

TEST_CASE("round schedule follows the ceil-halving loop") {
    CHECK(round_schedule(5, 1.0).configurations == std::vector<int>{3, 1, 1});
    CHECK(round_schedule(1, 1.0).configurations == std::vector<int>{1});
    CHECK(round_schedule(4, 1.0).configurations == std::vector<int>{2, 1, 1});
    CHECK(round_schedule(0, 1.0).configurations.empty());
    CHECK_THROWS_AS(round_schedule(-1, 1.0), std::invalid_argument);

    for (int n = 0; n <= 64; ++n) {
        auto s = round_schedule(n, 0.5);
        CHECK(s.repeater_count() == n);
        // trace length oracle: rounds(n) = 1 + rounds(floor(n/2))
        int expect = 0;
        for (int r = n; r > 0; r /= 2) ++expect;
        CHECK(s.num_rounds() == expect);
        for (double d : s.durations) CHECK(d == 0.5);
    }
}

TEST_CASE("round assignment picks odd chain positions") {
    auto chain = [](int n) {
        std::vector<NodeId> c;
        for (int i = 0; i < n; ++i) c.push_back({NodeKind::Satellite, i});
        return c;
    };
    // S-1-2-3-4-5-D: rounds {1,3,5}, {2}, {4}
    auto c7 = chain(7);
    auto rounds = assign_rounds_to_nodes(c7, round_schedule(5, 1.0));
    REQUIRE(rounds.size() == 3);
    CHECK(rounds[0] == std::vector<NodeId>{{NodeKind::Satellite, 1},
                                           {NodeKind::Satellite, 3},
                                           {NodeKind::Satellite, 5}});
    CHECK(rounds[1] == std::vector<NodeId>{{NodeKind::Satellite, 2}});
    CHECK(rounds[2] == std::vector<NodeId>{{NodeKind::Satellite, 4}});

    auto c3 = chain(3);
    auto r3 = assign_rounds_to_nodes(c3, round_schedule(1, 1.0));
    REQUIRE(r3.size() == 1);
    CHECK(r3[0] == std::vector<NodeId>{{NodeKind::Satellite, 1}});

    // S-1-2-3-D: rounds {1,3} then {2}
    auto c5 = chain(5);
    auto r5 = assign_rounds_to_nodes(c5, round_schedule(3, 1.0));
    REQUIRE(r5.size() == 2);
    CHECK(r5[0] == std::vector<NodeId>{{NodeKind::Satellite, 1}, {NodeKind::Satellite, 3}});
    CHECK(r5[1] == std::vector<NodeId>{{NodeKind::Satellite, 2}});

    CHECK_THROWS_AS(assign_rounds_to_nodes(c5, round_schedule(5, 1.0)), std::invalid_argument);
}

TEST_CASE("nested fidelity") {
    MemoryModel mem{300.0};

    SECTION("noiseless limit") {
        std::vector<double> w{1.0, 1.0, 1.0};
        MemoryModel huge{1e18};
        CHECK_THAT(fidelity_nested(w, round_schedule(2, 1.0), huge), WithinAbs(1.0, 1e-12));
    }
    SECTION("zero BSM time leaves only the link Werners") {
        std::vector<double> w{0.9, 0.8, 0.95};
        auto s = round_schedule(2, 1.0);
        s.durations = {0.0, 0.0};
        CHECK(fidelity_nested(w, s, mem) == (1.0 + 3.0 * (0.9 * 0.8 * 0.95)) / 4.0);
    }
    SECTION("five repeaters, unit rounds") {
        // rounds [3,1,1]: masses 2*(1*3 + 2*1 + 3*1) + 2*3 = 22 seconds of decay
        std::vector<double> w(6, 1.0);
        double expect = (1.0 + 3.0 * std::exp(-22.0 / 300.0)) / 4.0;
        CHECK_THAT(fidelity_nested(w, round_schedule(5, 1.0), mem), WithinRel(expect, 1e-12));
        TraceOracle oracle{300.0};
        CHECK_THAT(fidelity_nested(w, round_schedule(5, 1.0), mem),
                   WithinRel(oracle.nested(w, 5, 1.0), 1e-12));
    }
    SECTION("empty path is rejected") {
        std::vector<double> none;
        CHECK_THROWS_AS(fidelity_nested(none, round_schedule(0, 1.0), mem),
                        std::invalid_argument);
    }
}

TEST_CASE("wait-till-end fidelity") {
    MemoryModel mem{300.0};
    std::vector<double> w{0.95, 0.9, 0.99, 0.97};
    auto rounds = round_schedule(3, 1.0);

    SECTION("single snapshot reduces to the nested formula") {
        std::vector<double> starts{40.0};
        CHECK_THAT(fidelity_wait_till_end(w, rounds, starts, mem),
                   WithinRel(fidelity_nested(w, rounds, mem), 1e-14));
    }
    SECTION("positive offsets strictly lower the fidelity") {
        std::vector<double> starts{0.0, 60.0};
        CHECK(fidelity_wait_till_end(w, rounds, starts, mem) < fidelity_nested(w, rounds, mem));
    }
    SECTION("two snapshots, 60 s apart, against the trace oracle") {
        std::vector<double> starts{0.0, 60.0};
        TraceOracle oracle{300.0};
        CHECK_THAT(fidelity_wait_till_end(w, rounds, starts, mem),
                   WithinRel(oracle.wait_till_end(w, 3, 1.0, starts), 1e-12));
    }
}

TEST_CASE("segmented fidelity") {
    MemoryModel mem{300.0};

    SECTION("one segment matches nested after dropping the stray trailing factor") {
        std::vector<double> w{0.9, 0.95, 0.85, 0.97};
        auto plan = make_plan(w, {3}, 1.0, {25.0});
        double nested = fidelity_nested(w, round_schedule(3, 1.0), mem);
        CHECK_THAT(fidelity_segmented(plan, mem, SegmentedTrailing::Reconciled),
                   WithinRel(nested, 1e-14));
        // literal keeps the printed Wm(delta_last)
        double wr = 4.0 * fidelity_segmented(plan, mem, SegmentedTrailing::Reconciled) - 1.0;
        double wl = 4.0 * fidelity_segmented(plan, mem, SegmentedTrailing::Literal) - 1.0;
        CHECK_THAT(wl, WithinRel(wr * std::exp(-1.0 / 300.0), 1e-12));
    }
    SECTION("noiseless limit") {
        std::vector<double> w(5, 1.0);
        MemoryModel huge{1e18};
        auto plan = make_plan(w, {2, 2}, 1.0, {0.0, 50.0});
        CHECK_THAT(fidelity_segmented(plan, huge, SegmentedTrailing::Literal),
                   WithinAbs(1.0, 1e-12));
    }
    SECTION("matches the trace oracle on random plans") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> wdist(0.7, 1.0);
        TraceOracle oracle{300.0};
        for (int iter = 0; iter < 200; ++iter) {
            int k = 1 + static_cast<int>(rng() % 3);
            std::vector<int> reps;
            int links = 0;
            for (int i = 0; i < k; ++i) {
                int r = static_cast<int>(rng() % 4);
                if (i > 0 && r == 0) r = 1; // stitched segments carry >= 1 repeater
                reps.push_back(r);
                links += (i == 0) ? r + 1 : r;
            }
            std::vector<double> w;
            for (int i = 0; i < links; ++i) w.push_back(wdist(rng));
            double tbsm = 0.1 + (rng() % 100) / 50.0;
            std::vector<double> starts{0.0};
            for (int i = 1; i < k; ++i)
                starts.push_back(starts.back() + tbsm * 8 + (rng() % 100));
            auto plan = make_plan(w, reps, tbsm, starts);
            for (bool literal : {true, false}) {
                double mine = fidelity_segmented(
                    plan, MemoryModel{300.0},
                    literal ? SegmentedTrailing::Literal : SegmentedTrailing::Reconciled);
                CHECK_THAT(mine, WithinRel(oracle.segmented(w, reps, tbsm, starts, literal),
                                           1e-12));
            }
        }
    }
    SECTION("beats wait-till-end on multi-snapshot plans") {
        std::mt19937_64 rng(123);
        std::uniform_real_distribution<double> wdist(0.7, 1.0);
        for (int iter = 0; iter < 200; ++iter) {
            int k = 2 + static_cast<int>(rng() % 3);
            std::vector<int> reps;
            int links = 0;
            for (int i = 0; i < k; ++i) {
                int r = static_cast<int>(rng() % 4);
                if (i > 0 && r == 0) r = 1;
                reps.push_back(r);
                links += (i == 0) ? r + 1 : r;
            }
            std::vector<double> w;
            for (int i = 0; i < links; ++i) w.push_back(wdist(rng));
            double tbsm = 0.1 + (rng() % 100) / 50.0;
            std::vector<double> starts{0.0};
            for (int i = 1; i < k; ++i) {
                int rounds_prev = 0;
                for (int r = reps[i - 1]; r > 0; r /= 2) ++rounds_prev;
                starts.push_back(starts.back() + tbsm * (rounds_prev + 1) + (rng() % 200));
            }
            MemoryModel mem{50.0 + (rng() % 1000)};
            auto plan = make_plan(w, reps, tbsm, starts);
            int total_reps = links - 1;
            double seg = fidelity_segmented(plan, mem, SegmentedTrailing::Literal);
            double wait =
                fidelity_wait_till_end(w, round_schedule(total_reps, tbsm), starts, mem);
            CHECK(seg >= wait);
        }
    }
}

TEST_CASE("success probability and throughput") {
    ProtocolParams p;
    p.p_source = 0.9;
    p.p_bsm = 0.9;
    p.p_mem_fail = 0.1;
    p.modes = 1;

    CHECK_THAT(success_probability(2, p), WithinRel(0.9 * 0.81, 1e-12));
    ProtocolParams ideal = p;
    ideal.p_source = 1.0;
    ideal.p_bsm = 1.0;
    ideal.p_mem_fail = 0.0;
    CHECK(success_probability(5, ideal) == 1.0);
    CHECK_THAT(success_probability(7, p),
               WithinRel(std::pow(0.9, 6) * std::pow(0.81, 6) * std::pow(0.9, 5), 1e-12));
    CHECK_THROWS_AS(success_probability(1, p), std::invalid_argument);

    std::vector<double> ones{1.0, 1.0};
    CHECK(throughput(3, ideal, ones) == ideal.rate);
    std::vector<double> zero{1.0, 0.0};
    CHECK(throughput(3, ideal, zero) == 0.0);
    std::vector<double> half{0.5, 0.5};
    CHECK_THAT(throughput(3, p, half), WithinRel(10.0 * success_probability(3, p) * 0.25, 1e-12));
    // clamping: raw transmittance above 1 counts as 1
    std::vector<double> big{2.5, 0.5};
    CHECK_THAT(throughput(3, p, big), WithinRel(10.0 * success_probability(3, p) * 0.5, 1e-12));
}

TEST_CASE("stbd execution") {
    LinkPhysics phys;
    phys.d_ref_m = 10.0;
    MemoryModel mem{300.0};

    std::vector<double> w{0.95, 0.9, 0.92};
    auto plan = make_plan(w, {2}, 1.0, {0.0});
    std::vector<LinkChannel> channels{{12.0, LinkKind::ISL},
                                      {15.0, LinkKind::ISL},
                                      {20.0, LinkKind::ISL}};

    SECTION("single segment equals the nested protocol") {
        CHECK_THAT(stbd_deterministic(plan, mem, SegmentedTrailing::Reconciled),
                   WithinRel(fidelity_nested(w, round_schedule(2, 1.0), mem), 1e-14));
    }

    SECTION("a forced BSM failure drops the attempt") {
        ProtocolParams p;
        p.p_source = 1.0;
        p.p_bsm = 0.0;
        p.p_mem_fail = 0.0;
        LinkPhysics sure = phys;
        sure.d_ref_m = 100.0; // arrival probability clamps to 1
        Rng rng = make_rng(1, 2, 3);
        auto out = stbd_attempt(plan, channels, p, sure, mem, rng, false);
        CHECK(out.outcome == Outcome::DropBsm);
        CHECK(out.fidelity == 0.0);
    }

    SECTION("Monte Carlo matches the closed form on a fixed path") {
        ProtocolParams p;
        p.p_source = 0.9;
        p.p_bsm = 0.9;
        p.p_mem_fail = 0.1;
        p.modes = 1;
        std::vector<double> etas;
        for (const auto& ch : channels)
            etas.push_back(transmittance(ch.d_m, ch.kind, 1.0, 1.0, phys));
        double expect = success_probability(4, p);
        for (double e : etas) expect *= clamp_probability(e);

        const int attempts = 40000;
        int ok = 0;
        for (int a = 0; a < attempts; ++a) {
            Rng rng = make_rng(42, 7, a);
            auto out = stbd_attempt(plan, channels, p, phys, mem, rng, false);
            if (out.outcome == Outcome::Ok) ++ok;
        }
        double emp = static_cast<double>(ok) / attempts;
        double se = std::sqrt(expect * (1 - expect) / attempts);
        CHECK(std::abs(emp - expect) < 3.0 * se);
    }

    SECTION("attempts replay from their seed") {
        ProtocolParams p;
        for (int a = 0; a < 50; ++a) {
            Rng r1 = make_rng(9, 1, a);
            Rng r2 = make_rng(9, 1, a);
            auto o1 = stbd_attempt(plan, channels, p, phys, mem, r1, true);
            auto o2 = stbd_attempt(plan, channels, p, phys, mem, r2, true);
            CHECK(o1.outcome == o2.outcome);
            CHECK(o1.fidelity == o2.fidelity);
        }
    }
}

TEST_CASE("plan segmentation from a routed path") {
    SnapshotSchedule schedule;
    schedule.transition_points = {0.0, 30.0, 90.0};

    auto spatial = [](int slot, int a, int b, double werner) {
        SpaceTimeEdge e;
        e.slot_from = e.slot_to = slot;
        e.from = {NodeKind::Satellite, a};
        e.to = {NodeKind::Satellite, b};
        e.temporal = false;
        e.det_werner = werner;
        e.distance_m = 1000.0 * (a + b + 1);
        e.utility = 0.9;
        return e;
    };
    auto temporal = [](int slot, int node) {
        SpaceTimeEdge e;
        e.slot_from = slot;
        e.slot_to = slot + 1;
        e.from = e.to = NodeId{NodeKind::Satellite, node};
        e.temporal = true;
        e.utility = 0.95;
        return e;
    };

    PathSolution path;
    path.edges = {spatial(1, 0, 1, 0.99), spatial(1, 1, 2, 0.98), temporal(1, 2),
                  spatial(2, 2, 3, 0.97)};
    path.end_slot = 2;

    auto plan = plan_segments(path, schedule, 1.0);
    REQUIRE(plan.segments.size() == 2);
    CHECK(plan.path_nodes == 4);
    CHECK(plan.link_werner == std::vector<double>{0.99, 0.98, 0.97});
    CHECK(plan.segments[0].slot == 1);
    CHECK(plan.segments[0].start_time == 0.0);
    CHECK(plan.segments[0].num_repeaters == 1); // node 1
    CHECK(plan.segments[1].slot == 2);
    CHECK(plan.segments[1].start_time == 30.0);
    CHECK(plan.segments[1].num_repeaters == 1); // stitch node 2
    CHECK(plan.segments[1].rounds.configurations == std::vector<int>{1});

    auto channels = path_channels(path);
    REQUIRE(channels.size() == 3);
    CHECK(channels[2].d_m == 6000.0);
}
