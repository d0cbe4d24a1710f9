#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "leoq/protocol.hpp"
#include "leoq/router.hpp"
#include "leoq/spacetime.hpp"

namespace leoq {

// Locale-independent, 9 significant digits.
inline std::string fmt9(double v) {
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, r.ptr);
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::string edge_kind_tag(const SpaceTimeEdge& e) {
    if (e.temporal) return "TEMPORAL";
    return e.link_kind == LinkKind::ISL ? "SP-ISL" : "SP-DL";
}

// Snapshot listing: one SNAPSHOT header per slot, one L line per link.
inline std::string dump_snapshots(const TopologyBuild& topo,
                                  const std::vector<GroundSite>& sites) {
    std::ostringstream os;
    for (const Snapshot& s : topo.snapshots) {
        os << "SNAPSHOT " << s.index << ' ' << fmt9(s.t_begin) << ' ' << fmt9(s.t_end) << '\n';
        for (const SnapshotEdge& e : s.edges) {
            os << "L " << node_name(sites, e.a) << ' ' << node_name(sites, e.b) << ' '
               << (e.kind == LinkKind::ISL ? "ISL" : "DL") << '\n';
        }
    }
    return os.str();
}

// Space-time graph: V lines for vertices, E/T lines for spatial and temporal
// edges with the three utilities at 9 significant digits.
inline std::string dump_spacetime(const SpaceTimeGraph& g, const std::vector<GroundSite>& sites) {
    std::ostringstream os;
    for (int m = 1; m <= g.num_slots; ++m) {
        for (int i = 0; i < g.num_nodes(); ++i) {
            os << "V " << m << ' ' << node_name(sites, g.node_from_linear(i)) << '\n';
        }
    }
    for (const SpaceTimeEdge& e : g.edges) {
        if (e.temporal) {
            os << "T " << e.slot_from << ' ' << e.slot_to << ' ' << node_name(sites, e.from) << ' '
               << fmt9(e.fidelity_utility) << ' ' << fmt9(e.memory_utility) << ' '
               << fmt9(e.utility) << '\n';
        } else {
            os << "E " << e.slot_from << ' ' << node_name(sites, e.from) << ' '
               << node_name(sites, e.to) << ' ' << edge_kind_tag(e) << ' '
               << fmt9(e.fidelity_utility) << ' ' << fmt9(e.memory_utility) << ' '
               << fmt9(e.utility) << '\n';
        }
    }
    return os.str();
}

// One EDGE line per path edge plus a summary; NO_PATH when routing failed.
inline std::string dump_path(const PathSolution* path, const std::vector<GroundSite>& sites) {
    if (!path) return "NO_PATH\n";
    std::ostringstream os;
    for (const SpaceTimeEdge& e : path->edges) {
        os << "EDGE " << e.slot_from << ' ' << node_name(sites, e.from) << ' '
           << node_name(sites, e.to) << ' ' << edge_kind_tag(e) << ' ' << fmt9(e.utility) << '\n';
    }
    os << "SUMMARY utility=" << fmt9(path->utility) << " end_slot=" << path->end_slot
       << " segments=" << path->segment_count() << '\n';
    return os.str();
}

struct ParsedPathDump {
    bool no_path = false;
    std::vector<double> edge_utilities;
    double summary_utility = 0.0;
    int end_slot = 0;
    int segments = 0;
};

inline ParsedPathDump parse_path_dump(const std::string& text) {
    ParsedPathDump p;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line == "NO_PATH") {
            p.no_path = true;
            return p;
        }
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "EDGE") {
            int slot;
            std::string from, to, kind, util;
            ls >> slot >> from >> to >> kind >> util;
            p.edge_utilities.push_back(std::stod(util));
        } else if (tag == "SUMMARY") {
            std::string field;
            while (ls >> field) {
                auto eq = field.find('=');
                if (eq == std::string::npos) continue;
                std::string key = field.substr(0, eq);
                std::string val = field.substr(eq + 1);
                if (key == "utility") p.summary_utility = std::stod(val);
                if (key == "end_slot") p.end_slot = std::stoi(val);
                if (key == "segments") p.segments = std::stoi(val);
            }
        }
    }
    return p;
}

// attempt id, path id, outcome, delivered fidelity (blank on drop)
inline std::string outcome_line(long attempt, int path_id, const StbdOutcome& o) {
    std::string s = std::to_string(attempt) + ' ' + std::to_string(path_id) + ' ' +
                    outcome_name(o.outcome) + ' ';
    if (o.outcome == Outcome::Ok) s += fmt9(o.fidelity);
    s += '\n';
    return s;
}

} // namespace leoq
