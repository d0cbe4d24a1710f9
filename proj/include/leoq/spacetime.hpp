#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "leoq/linkphys.hpp"
#include "leoq/orbit.hpp"

namespace leoq {

// Transition points t_0 .. t_M; slot m (1-based) covers [t_{m-1}, t_m).
struct SnapshotSchedule {
    std::vector<double> transition_points;

    int num_slots() const { return static_cast<int>(transition_points.size()) - 1; }
    double slot_begin(int m) const { return transition_points.at(m - 1); }
    double slot_end(int m) const { return transition_points.at(m); }
    double slot_duration(int m) const { return slot_end(m) - slot_begin(m); }
    double slot_midpoint(int m) const { return 0.5 * (slot_begin(m) + slot_end(m)); }

    // Slot containing t; the final transition point belongs to the last slot.
    std::optional<int> slot_of(double t) const {
        if (num_slots() < 1) return std::nullopt;
        if (t < transition_points.front() || t > transition_points.back()) return std::nullopt;
        for (int m = 1; m <= num_slots(); ++m) {
            if (t < slot_end(m)) return m;
        }
        return num_slots();
    }

    void validate() const {
        if (num_slots() < 1) throw std::invalid_argument("schedule needs at least one slot");
        for (std::size_t i = 1; i < transition_points.size(); ++i) {
            if (!(transition_points[i] > transition_points[i - 1]))
                throw std::invalid_argument("transition points must be strictly increasing");
        }
    }
};

struct SnapshotEdge {
    NodeId a;
    NodeId b;
    LinkKind kind;

    friend bool operator==(const SnapshotEdge&, const SnapshotEdge&) = default;
};

struct Snapshot {
    int index = 1; // 1-based slot number
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<SnapshotEdge> edges; // canonical order, a < b
};

struct TopologyBuild {
    SnapshotSchedule schedule;
    std::vector<Snapshot> snapshots;
};

// Connectivity evaluated at a single instant, canonical edge order.
inline std::vector<SnapshotEdge> edges_at(const ConstellationSpec& spec,
                                          const std::vector<GroundSite>& sites, double t,
                                          double max_range_m) {
    int ns = spec.num_satellites();
    int ng = static_cast<int>(sites.size());
    std::vector<Vec3> pos(ns + ng);
    std::vector<NodeId> ids(ns + ng);
    for (int i = 0; i < ns; ++i) {
        ids[i] = {NodeKind::Satellite, i};
        pos[i] = propagate(spec, ids[i], t);
    }
    for (int j = 0; j < ng; ++j) {
        ids[ns + j] = {NodeKind::Ground, j};
        pos[ns + j] = ground_position(spec, sites[j], t);
    }
    std::vector<SnapshotEdge> edges;
    for (int i = 0; i < ns + ng; ++i) {
        for (int j = i + 1; j < ns + ng; ++j) {
            bool both_ground = ids[i].kind == NodeKind::Ground && ids[j].kind == NodeKind::Ground;
            if (both_ground) continue;
            if (distance(pos[i], pos[j]) > max_range_m) continue;
            if (!line_of_sight(pos[i], pos[j], spec.earth_radius_m)) continue;
            LinkKind kind = (ids[i].kind == NodeKind::Satellite && ids[j].kind == NodeKind::Satellite)
                                ? LinkKind::ISL
                                : LinkKind::Downlink;
            edges.push_back({ids[i], ids[j], kind});
        }
    }
    return edges;
}

// Sample connectivity every sample_dt over [start, start+horizon); consecutive
// samples with identical edge sets coalesce into one snapshot.
inline TopologyBuild build_schedule(const ConstellationSpec& spec,
                                    const std::vector<GroundSite>& sites, double start,
                                    double horizon, double sample_dt, double max_range_m) {
    spec.validate();
    for (const auto& s : sites) s.validate();
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(sample_dt > 0.0)) throw std::invalid_argument("sample_dt must be positive");
    if (spec.num_satellites() + static_cast<int>(sites.size()) < 1)
        throw std::invalid_argument("empty node set");

    TopologyBuild out;
    out.schedule.transition_points.push_back(start);

    double t_end = start + horizon;
    std::vector<SnapshotEdge> current = edges_at(spec, sites, start, max_range_m);
    for (double t = start + sample_dt; t < t_end; t += sample_dt) {
        std::vector<SnapshotEdge> e = edges_at(spec, sites, t, max_range_m);
        if (e != current) {
            out.schedule.transition_points.push_back(t);
            Snapshot snap;
            snap.index = static_cast<int>(out.snapshots.size()) + 1;
            snap.t_begin = out.schedule.transition_points[snap.index - 1];
            snap.t_end = t;
            snap.edges = std::move(current);
            out.snapshots.push_back(std::move(snap));
            current = std::move(e);
        }
    }
    out.schedule.transition_points.push_back(t_end);
    Snapshot last;
    last.index = static_cast<int>(out.snapshots.size()) + 1;
    last.t_begin = out.schedule.transition_points[last.index - 1];
    last.t_end = t_end;
    last.edges = std::move(current);
    out.snapshots.push_back(std::move(last));
    return out;
}

// An edge of the time-expanded graph. Spatial edges live inside one slot and
// are traversable both ways; temporal edges carry a node from slot m to m+1.
struct SpaceTimeEdge {
    int slot_from = 1;
    int slot_to = 1;
    NodeId from;
    NodeId to;
    bool temporal = false;
    LinkKind link_kind = LinkKind::ISL;
    double fidelity_utility = 1.0;
    double memory_utility = 1.0;
    double utility = 1.0;
    double det_fidelity = 1.0; // deterministic midpoint fidelity (spatial)
    double det_werner = 1.0;   // deterministic midpoint Werner parameter (spatial)
    double distance_m = 0.0;   // spatial only
};

struct SpaceTimeGraph {
    int num_slots = 0;
    int num_satellites = 0;
    int num_ground = 0;
    std::vector<SpaceTimeEdge> edges;

    int num_nodes() const { return num_satellites + num_ground; }

    int node_linear(NodeId n) const {
        return n.kind == NodeKind::Satellite ? n.index : num_satellites + n.index;
    }
    NodeId node_from_linear(int i) const {
        return i < num_satellites ? NodeId{NodeKind::Satellite, i}
                                  : NodeId{NodeKind::Ground, i - num_satellites};
    }
    int vertex_id(int slot, NodeId n) const { return (slot - 1) * num_nodes() + node_linear(n); }
    int num_vertices() const { return num_slots * num_nodes(); }
};

inline SpaceTimeGraph build_spacetime_graph(const ConstellationSpec& spec,
                                            const std::vector<GroundSite>& sites,
                                            const TopologyBuild& topo, const LinkPhysics& phys,
                                            const MemoryModel& mem, double w_f, double w_m,
                                            const DownlinkOutageCache* cache = nullptr) {
    if (topo.snapshots.empty()) throw std::invalid_argument("no snapshots");
    topo.schedule.validate();

    SpaceTimeGraph g;
    g.num_slots = topo.schedule.num_slots();
    g.num_satellites = spec.num_satellites();
    g.num_ground = static_cast<int>(sites.size());

    constexpr double kUtilFloor = 1e-300;
    for (const Snapshot& snap : topo.snapshots) {
        double t_mid = topo.schedule.slot_midpoint(snap.index);
        double dur = topo.schedule.slot_duration(snap.index);
        double mem_util = memory_utility(dur, mem);
        for (const SnapshotEdge& e : snap.edges) {
            Vec3 pa = node_position(spec, sites, e.a, t_mid);
            Vec3 pb = node_position(spec, sites, e.b, t_mid);
            double d = distance(pa, pb);
            double fid_util =
                std::max(fidelity_outage_utility(d, e.kind, phys, cache), kUtilFloor);
            SpaceTimeEdge edge;
            edge.slot_from = edge.slot_to = snap.index;
            edge.from = e.a;
            edge.to = e.b;
            edge.temporal = false;
            edge.link_kind = e.kind;
            edge.fidelity_utility = fid_util;
            edge.memory_utility = mem_util;
            edge.utility = link_utility(fid_util, mem_util, w_f, w_m);
            edge.det_fidelity = deterministic_link_fidelity(d, e.kind, phys);
            edge.det_werner = deterministic_link_werner(d, e.kind, phys);
            edge.distance_m = d;
            g.edges.push_back(edge);
        }
    }
    // one storage edge per node per transition; decay over the destination slot
    for (int m = 1; m < g.num_slots; ++m) {
        double mem_util = memory_utility(topo.schedule.slot_duration(m + 1), mem);
        for (int i = 0; i < g.num_nodes(); ++i) {
            SpaceTimeEdge edge;
            edge.slot_from = m;
            edge.slot_to = m + 1;
            edge.from = edge.to = g.node_from_linear(i);
            edge.temporal = true;
            edge.fidelity_utility = 1.0;
            edge.memory_utility = mem_util;
            edge.utility = link_utility(1.0, mem_util, w_f, w_m);
            g.edges.push_back(edge);
        }
    }
    return g;
}

} // namespace leoq
