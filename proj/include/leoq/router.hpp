#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "leoq/spacetime.hpp"

namespace leoq {

struct PathQuery {
    NodeId source;
    NodeId destination;
    double t_start = 0.0;
    double coherence_horizon = 300.0;

    void validate() const {
        if (source == destination) throw std::invalid_argument("source equals destination");
        if (!(coherence_horizon > 0.0))
            throw std::invalid_argument("coherence horizon must be positive");
    }
};

struct PathSolution {
    std::vector<SpaceTimeEdge> edges; // oriented source -> destination
    double utility = 1.0;             // product of edge utilities
    int end_slot = 1;

    int hop_count() const {
        int h = 0;
        for (const auto& e : edges)
            if (!e.temporal) ++h;
        return h;
    }
    int segment_count() const {
        int k = 0;
        int last_slot = -1;
        for (const auto& e : edges) {
            if (!e.temporal && e.slot_from != last_slot) {
                ++k;
                last_slot = e.slot_from;
            }
        }
        return k;
    }
};

namespace detail {

// Directed arc view of the graph; spatial edges expand to two arcs.
struct Arc {
    int to;
    int edge;      // index into graph.edges
    bool reversed; // traversal against the stored orientation
};

struct RouterIndex {
    std::vector<std::vector<Arc>> adj;
    std::vector<double> weight; // per stored edge, -log utility
};

// Spatial edges below the fidelity floor are pruned before search.
inline RouterIndex index_graph(const SpaceTimeGraph& g, double gamma_min) {
    RouterIndex ix;
    ix.adj.resize(g.num_vertices());
    ix.weight.resize(g.edges.size());
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const SpaceTimeEdge& e = g.edges[i];
        ix.weight[i] = -std::log(e.utility);
        if (e.temporal) {
            int u = g.vertex_id(e.slot_from, e.from);
            int v = g.vertex_id(e.slot_to, e.to);
            ix.adj[u].push_back({v, static_cast<int>(i), false});
        } else {
            if (e.det_fidelity < gamma_min) continue;
            int u = g.vertex_id(e.slot_from, e.from);
            int v = g.vertex_id(e.slot_from, e.to);
            ix.adj[u].push_back({v, static_cast<int>(i), false});
            ix.adj[v].push_back({u, static_cast<int>(i), true});
        }
    }
    return ix;
}

struct SearchTree {
    std::vector<double> dist;
    std::vector<int> hops;
    std::vector<int> pred_arc_edge; // -1 if none
    std::vector<bool> pred_reversed;
    std::vector<int> pred_vertex;
};

// Lexicographic relaxation (cost, then edge count) keeps equal-utility
// alternatives deterministic.
inline SearchTree dijkstra(const SpaceTimeGraph& g, const RouterIndex& ix, int source_vertex,
                           int max_slot) {
    SearchTree t;
    int n = g.num_vertices();
    t.dist.assign(n, std::numeric_limits<double>::infinity());
    t.hops.assign(n, std::numeric_limits<int>::max());
    t.pred_arc_edge.assign(n, -1);
    t.pred_reversed.assign(n, false);
    t.pred_vertex.assign(n, -1);
    t.dist[source_vertex] = 0.0;
    t.hops[source_vertex] = 0;

    using Item = std::tuple<double, int, int>; // cost, hops, vertex
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0.0, 0, source_vertex});
    while (!pq.empty()) {
        auto [d, h, u] = pq.top();
        pq.pop();
        if (d > t.dist[u] || (d == t.dist[u] && h > t.hops[u])) continue;
        for (const Arc& a : ix.adj[u]) {
            int dest_slot = (a.to / g.num_nodes()) + 1;
            if (dest_slot > max_slot) continue;
            double nd = d + ix.weight[a.edge];
            int nh = h + 1;
            if (nd < t.dist[a.to] || (nd == t.dist[a.to] && nh < t.hops[a.to])) {
                t.dist[a.to] = nd;
                t.hops[a.to] = nh;
                t.pred_arc_edge[a.to] = a.edge;
                t.pred_reversed[a.to] = a.reversed;
                t.pred_vertex[a.to] = u;
                pq.push({nd, nh, a.to});
            }
        }
    }
    return t;
}

inline SpaceTimeEdge oriented(const SpaceTimeEdge& e, bool reversed) {
    SpaceTimeEdge out = e;
    if (reversed) std::swap(out.from, out.to);
    return out;
}

inline std::optional<PathSolution> extract_path(const SpaceTimeGraph& g, const SearchTree& t,
                                                int source_vertex, int target_vertex,
                                                int end_slot) {
    if (!std::isfinite(t.dist[target_vertex])) return std::nullopt;
    PathSolution sol;
    sol.end_slot = end_slot;
    int v = target_vertex;
    while (v != source_vertex) {
        int ei = t.pred_arc_edge[v];
        sol.edges.push_back(oriented(g.edges[ei], t.pred_reversed[v]));
        v = t.pred_vertex[v];
    }
    std::reverse(sol.edges.begin(), sol.edges.end());
    sol.utility = 1.0;
    for (const auto& e : sol.edges) sol.utility *= e.utility;
    return sol;
}

} // namespace detail

// Max-product path from (start_slot, source) to (target_slot, destination),
// solved as a shortest path on -log utilities.
inline std::optional<PathSolution> optimal_path_to(const SpaceTimeGraph& g, NodeId source,
                                                   int start_slot, NodeId destination,
                                                   int target_slot, double gamma_min) {
    if (start_slot < 1 || start_slot > g.num_slots || target_slot < start_slot ||
        target_slot > g.num_slots)
        return std::nullopt;
    auto ix = detail::index_graph(g, gamma_min);
    auto tree = detail::dijkstra(g, ix, g.vertex_id(start_slot, source), target_slot);
    return detail::extract_path(g, tree, g.vertex_id(start_slot, source),
                                g.vertex_id(target_slot, destination), target_slot);
}

// Candidate end slots are the slot containing t_start plus every slot whose
// start transition point falls within the coherence horizon. Ties resolve to
// the earliest end slot, then fewest edges.
inline std::optional<PathSolution> optimal_entanglement_path(const SpaceTimeGraph& g,
                                                             const SnapshotSchedule& schedule,
                                                             const PathQuery& query,
                                                             double gamma_min) {
    query.validate();
    auto slot_s = schedule.slot_of(query.t_start);
    if (!slot_s) return std::nullopt;

    double t_h = query.t_start + query.coherence_horizon;
    int max_slot = *slot_s;
    for (int m = *slot_s + 1; m <= schedule.num_slots(); ++m) {
        if (schedule.slot_begin(m) <= t_h) max_slot = m;
    }

    auto ix = detail::index_graph(g, gamma_min);
    int src_vertex = g.vertex_id(*slot_s, query.source);
    auto tree = detail::dijkstra(g, ix, src_vertex, max_slot);

    // ascending slot order makes the earliest end slot win utility ties
    std::optional<PathSolution> best;
    for (int m = *slot_s; m <= max_slot; ++m) {
        auto cand = detail::extract_path(g, tree, src_vertex,
                                         g.vertex_id(m, query.destination), m);
        if (!cand) continue;
        if (!best || cand->utility > best->utility) best = std::move(cand);
    }
    return best;
}

// Per-snapshot dynamic baseline: route inside the snapshot containing t_start
// only, with no storage edges.
inline std::optional<PathSolution> baseline_dynamic_path(const SpaceTimeGraph& g,
                                                         const SnapshotSchedule& schedule,
                                                         const PathQuery& query,
                                                         double gamma_min) {
    query.validate();
    auto slot_s = schedule.slot_of(query.t_start);
    if (!slot_s) return std::nullopt;

    SpaceTimeGraph sub;
    sub.num_slots = g.num_slots;
    sub.num_satellites = g.num_satellites;
    sub.num_ground = g.num_ground;
    for (const auto& e : g.edges) {
        if (!e.temporal && e.slot_from == *slot_s) sub.edges.push_back(e);
    }
    return optimal_path_to(sub, query.source, *slot_s, query.destination, *slot_s, gamma_min);
}

} // namespace leoq
