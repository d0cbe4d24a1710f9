#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "leoq/linkphys.hpp"
#include "leoq/router.hpp"

namespace leoq {

struct ProtocolParams {
    double rate = 10.0;     // ebits/s
    double p_source = 0.9;  // entanglement source success
    double p_bsm = 0.9;     // BSM success
    double p_mem_fail = 0.1; // single-mode memory failure
    int modes = 1;          // modes per memory; the memory fails only if all fail
    double t_bsm = 1.0;     // seconds per BSM round

    void validate() const {
        auto prob = [](double p, const char* what) {
            if (p < 0.0 || p > 1.0) throw std::invalid_argument(std::string(what) + " must be in [0,1]");
        };
        prob(p_source, "p_source");
        prob(p_bsm, "p_bsm");
        prob(p_mem_fail, "p_mem_fail");
        if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
        if (modes < 1) throw std::invalid_argument("modes must be >= 1");
        if (!(t_bsm > 0.0)) throw std::invalid_argument("t_bsm must be positive");
    }
};

// Rounds of simultaneous BSMs: N_i = ceil(remaining/2) until none remain.
struct RoundSchedule {
    std::vector<int> configurations; // N_i
    std::vector<double> durations;   // delta_i

    int num_rounds() const { return static_cast<int>(configurations.size()); }
    int repeater_count() const {
        return std::accumulate(configurations.begin(), configurations.end(), 0);
    }
    double total_duration() const {
        return std::accumulate(durations.begin(), durations.end(), 0.0);
    }
};

inline RoundSchedule round_schedule(int n_repeater, double t_bsm) {
    if (n_repeater < 0) throw std::invalid_argument("repeater count must be nonnegative");
    RoundSchedule s;
    int remaining = n_repeater;
    while (remaining > 0) {
        int ni = (remaining + 1) / 2;
        s.configurations.push_back(ni);
        s.durations.push_back(t_bsm);
        remaining -= ni;
    }
    return s;
}

// Round 1 swaps at the odd positions of the repeater chain; each later round
// re-indexes the survivors and takes odd positions again. The schedule counts
// are authoritative and must match the chain.
inline std::vector<std::vector<NodeId>> assign_rounds_to_nodes(std::span<const NodeId> chain,
                                                               const RoundSchedule& schedule) {
    if (chain.size() < 2) throw std::invalid_argument("chain needs at least the two end nodes");
    std::vector<NodeId> repeaters(chain.begin() + 1, chain.end() - 1);
    if (schedule.repeater_count() != static_cast<int>(repeaters.size()))
        throw std::invalid_argument("schedule inconsistent with path length");

    std::vector<std::vector<NodeId>> rounds;
    for (int ni : schedule.configurations) {
        std::vector<NodeId> picked;
        std::vector<NodeId> survivors;
        for (std::size_t i = 0; i < repeaters.size(); ++i) {
            if (i % 2 == 0 && static_cast<int>(picked.size()) < ni)
                picked.push_back(repeaters[i]);
            else
                survivors.push_back(repeaters[i]);
        }
        rounds.push_back(std::move(picked));
        repeaters = std::move(survivors);
    }
    return rounds;
}

// F = (1 + 3 Prod W_x Prod_i Wm(S_i)^{2 N_i} Wm(S_last)^2) / 4
inline double fidelity_nested(std::span<const double> link_werner, const RoundSchedule& schedule,
                              const MemoryModel& mem) {
    if (link_werner.empty()) throw std::invalid_argument("empty path");
    double w = compose_werner(link_werner);
    double cum = 0.0;
    for (int i = 0; i < schedule.num_rounds(); ++i) {
        cum += schedule.durations[i];
        w *= std::pow(memory_utility(cum, mem), 2.0 * schedule.configurations[i]);
    }
    double end = memory_utility(cum, mem);
    w *= end * end;
    return fidelity_from_werner(w);
}

// Wait-until-the-end nesting: the pairs sit in memory until the final
// snapshot, so round i's factor is offset by (t_f - t_i), with t_i the start
// of the snapshot feeding round i (clamped to the last start), and the end
// factors by (t_f - t_0). The two end factors are unsquared, as printed.
inline double fidelity_wait_till_end(std::span<const double> link_werner,
                                     const RoundSchedule& schedule,
                                     std::span<const double> snapshot_starts,
                                     const MemoryModel& mem) {
    if (link_werner.empty()) throw std::invalid_argument("empty path");
    if (snapshot_starts.empty()) throw std::invalid_argument("need snapshot start times");
    double t0 = snapshot_starts.front();
    double tf = snapshot_starts.back();
    std::size_t last = snapshot_starts.size() - 1;

    double w = compose_werner(link_werner);
    double cum = 0.0;
    for (int i = 0; i < schedule.num_rounds(); ++i) {
        cum += schedule.durations[i];
        double ti = snapshot_starts[std::min(static_cast<std::size_t>(i), last)];
        w *= std::pow(memory_utility((tf - ti) + cum, mem), 2.0 * schedule.configurations[i]);
    }
    w *= memory_utility(cum, mem);
    w *= memory_utility((tf - t0) + cum, mem);
    return fidelity_from_werner(w);
}

struct Segment {
    int slot = 1;                 // snapshot index
    double start_time = 0.0;      // snapshot start
    int num_repeaters = 0;        // swap chain repeaters (stitch node included past segment 1)
    RoundSchedule rounds;
    std::vector<int> link_indices; // spatial links established in this segment
};

struct SegmentPlan {
    std::vector<Segment> segments;
    std::vector<double> link_werner; // one entry per spatial link, path order
    int path_nodes = 0;              // n

    int total_links() const { return static_cast<int>(link_werner.size()); }
};

// Trailing factors of the segmented fidelity as printed carry an extra
// Wm(delta_last); the reconciled form drops it so a one-segment plan matches
// the plain nested formula.
enum class SegmentedTrailing { Literal, Reconciled };

inline double fidelity_segmented(const SegmentPlan& plan, const MemoryModel& mem,
                                 SegmentedTrailing trailing = SegmentedTrailing::Literal) {
    if (plan.segments.empty() || plan.link_werner.empty())
        throw std::invalid_argument("empty segment plan");
    double w = compose_werner(plan.link_werner);

    std::size_t k_count = plan.segments.size();
    double total_bsm = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
        const Segment& seg = plan.segments[k];
        double cum = 0.0;
        for (int i = 0; i < seg.rounds.num_rounds(); ++i) {
            cum += seg.rounds.durations[i];
            w *= std::pow(memory_utility(cum, mem), 2.0 * seg.rounds.configurations[i]);
        }
        double gap = (k + 1 < k_count)
                         ? plan.segments[k + 1].start_time - seg.start_time
                         : 0.0;
        w *= memory_utility(gap + cum, mem);
        total_bsm += cum;
    }
    double span = plan.segments.back().start_time - plan.segments.front().start_time;
    w *= memory_utility(span + total_bsm, mem);
    if (trailing == SegmentedTrailing::Literal) {
        const RoundSchedule& lastr = plan.segments.back().rounds;
        double delta_last = lastr.durations.empty() ? 0.0 : lastr.durations.back();
        w *= memory_utility(delta_last, mem);
    }
    return fidelity_from_werner(w);
}

// P = Ps^(n-1) (1 - Pm^X)^(2(n-1)) Pb^(n-2)
inline double success_probability(int n_nodes, const ProtocolParams& params) {
    if (n_nodes < 2) throw std::invalid_argument("a chain needs at least two nodes");
    params.validate();
    double mem_ok = 1.0 - std::pow(params.p_mem_fail, params.modes);
    return std::pow(params.p_source, n_nodes - 1) * std::pow(mem_ok, 2.0 * (n_nodes - 1)) *
           std::pow(params.p_bsm, n_nodes - 2);
}

// r = R * P_success * Prod eta (each eta clamped to [0,1])
inline double throughput(int n_nodes, const ProtocolParams& params,
                         std::span<const double> transmittances) {
    double p = success_probability(n_nodes, params);
    double eta = 1.0;
    for (double e : transmittances) eta *= clamp_probability(e);
    return params.rate * p * eta;
}

enum class Outcome { Ok, DropFid, DropSrc, DropBsm, DropMem, NoPath };

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Ok: return "OK";
        case Outcome::DropFid: return "DROP_FID";
        case Outcome::DropSrc: return "DROP_SRC";
        case Outcome::DropBsm: return "DROP_BSM";
        case Outcome::DropMem: return "DROP_MEM";
        case Outcome::NoPath: return "NO_PATH";
    }
    return "?";
}

// Channel state of one spatial link of the executed path.
struct LinkChannel {
    double d_m = 1.0;
    LinkKind kind = LinkKind::ISL;
};

struct StbdOutcome {
    Outcome outcome = Outcome::NoPath;
    double fidelity = 0.0; // delivered fidelity; 0 on drop
};

// One Monte Carlo attempt. With sample_channel the pointing and turbulence
// gains are drawn per link and drive both the fidelity-outage test and the
// arrival probability; otherwise the gains sit at h^2 = Y = 1.
inline StbdOutcome stbd_attempt(const SegmentPlan& plan, std::span<const LinkChannel> channels,
                                const ProtocolParams& params, const LinkPhysics& phys,
                                const MemoryModel& mem, Rng& rng, bool sample_channel,
                                SegmentedTrailing trailing = SegmentedTrailing::Literal) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int n = plan.path_nodes;

    for (const LinkChannel& ch : channels) {
        if (uni(rng) >= params.p_source) return {Outcome::DropSrc, 0.0};
        double h2 = 1.0, y = 1.0;
        if (sample_channel) {
            h2 = sample_pointing(rng, phys.chi_n, phys.omega);
            if (ch.kind == LinkKind::Downlink)
                y = sample_turbulence(rng, phys.alpha_turb, phys.beta_turb);
        }
        double gain = (ch.kind == LinkKind::Downlink) ? h2 * y : h2;
        if (gain < eta_threshold(ch.d_m, phys)) return {Outcome::DropFid, 0.0};
        double arrive = clamp_probability(transmittance(ch.d_m, ch.kind, h2, y, phys));
        if (uni(rng) >= arrive) return {Outcome::DropFid, 0.0};
    }
    double mem_fail = std::pow(params.p_mem_fail, params.modes);
    for (int i = 0; i < 2 * (n - 1); ++i) {
        if (uni(rng) < mem_fail) return {Outcome::DropMem, 0.0};
    }
    for (int i = 0; i < n - 2; ++i) {
        if (uni(rng) >= params.p_bsm) return {Outcome::DropBsm, 0.0};
    }
    return {Outcome::Ok, fidelity_segmented(plan, mem, trailing)};
}

// Deterministic variant of the executed protocol.
inline double stbd_deterministic(const SegmentPlan& plan, const MemoryModel& mem,
                                 SegmentedTrailing trailing = SegmentedTrailing::Literal) {
    return fidelity_segmented(plan, mem, trailing);
}

// Segment a routed path by snapshot and lay out the per-segment nesting.
// Past the first segment the running long-haul pair enters the new chain as
// one more link held at the transition node, which joins that segment's
// repeaters.
inline SegmentPlan plan_segments(const PathSolution& path, const SnapshotSchedule& schedule,
                                 double t_bsm) {
    SegmentPlan plan;
    std::vector<const SpaceTimeEdge*> spatial;
    for (const auto& e : path.edges)
        if (!e.temporal) spatial.push_back(&e);
    if (spatial.empty()) throw std::invalid_argument("path has no spatial edges");

    int nodes = 1;
    for (std::size_t i = 0; i < spatial.size(); ++i) {
        plan.link_werner.push_back(spatial[i]->det_werner);
        ++nodes;
    }
    plan.path_nodes = nodes;

    std::size_t i = 0;
    bool first = true;
    while (i < spatial.size()) {
        int slot = spatial[i]->slot_from;
        int links = 0;
        Segment seg;
        seg.slot = slot;
        seg.start_time = schedule.slot_begin(slot);
        while (i < spatial.size() && spatial[i]->slot_from == slot) {
            seg.link_indices.push_back(static_cast<int>(i));
            ++links;
            ++i;
        }
        // interior nodes of the sub-chain, plus the stitch node when a
        // long-haul pair is already running
        seg.num_repeaters = first ? links - 1 : links;
        seg.rounds = round_schedule(seg.num_repeaters, t_bsm);
        plan.segments.push_back(std::move(seg));
        first = false;
    }
    return plan;
}

inline std::vector<LinkChannel> path_channels(const PathSolution& path) {
    std::vector<LinkChannel> out;
    for (const auto& e : path.edges)
        if (!e.temporal) out.push_back({e.distance_m, e.link_kind});
    return out;
}

} // namespace leoq
