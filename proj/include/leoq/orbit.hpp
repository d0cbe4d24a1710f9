#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "leoq/vec.hpp"

namespace leoq {

inline constexpr double kEarthMu = 3.986004418e14;        // m^3/s^2
inline constexpr double kEarthSiderealRate = 7.2921159e-5; // rad/s

// Walker-delta constellation on circular orbits. Plane p has RAAN 2*pi*p/P;
// satellite s in a plane starts at anomaly 2*pi*s/S + p*phasing_offset.
struct ConstellationSpec {
    int num_planes = 1;
    int sats_per_plane = 1;
    double altitude_m = 550e3;
    double inclination_rad = 0.0;
    double earth_radius_m = 6371e3;
    double phasing_offset_rad = 0.0;

    int num_satellites() const { return num_planes * sats_per_plane; }
    double orbit_radius_m() const { return earth_radius_m + altitude_m; }

    void validate() const {
        if (num_planes < 1) throw std::invalid_argument("num_planes must be >= 1");
        if (sats_per_plane < 1) throw std::invalid_argument("sats_per_plane must be >= 1");
        if (!(altitude_m > 0.0)) throw std::invalid_argument("altitude must be positive");
        if (inclination_rad < 0.0 || inclination_rad > std::numbers::pi)
            throw std::invalid_argument("inclination must be in [0, pi]");
        if (!(earth_radius_m > 0.0)) throw std::invalid_argument("earth radius must be positive");
    }
};

struct GroundSite {
    std::string name;
    double latitude_rad = 0.0;
    double longitude_rad = 0.0;

    void validate() const {
        if (std::abs(latitude_rad) > std::numbers::pi / 2 + 1e-12)
            throw std::invalid_argument("latitude out of range for site " + name);
        if (std::abs(longitude_rad) > std::numbers::pi + 1e-12)
            throw std::invalid_argument("longitude out of range for site " + name);
    }
};

enum class NodeKind { Satellite, Ground };

struct NodeId {
    NodeKind kind = NodeKind::Satellite;
    int index = 0;

    friend bool operator==(const NodeId&, const NodeId&) = default;
    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline double orbital_period(const ConstellationSpec& spec) {
    double a = spec.orbit_radius_m();
    return 2.0 * std::numbers::pi * std::sqrt(a * a * a / kEarthMu);
}

// Inertial position of a satellite at epoch offset t.
inline Vec3 propagate(const ConstellationSpec& spec, NodeId sat, double t) {
    if (sat.kind != NodeKind::Satellite)
        throw std::invalid_argument("propagate expects a satellite node");
    if (sat.index < 0 || sat.index >= spec.num_satellites())
        throw std::invalid_argument("unknown satellite index " + std::to_string(sat.index));

    int plane = sat.index / spec.sats_per_plane;
    int slot = sat.index % spec.sats_per_plane;

    double raan = 2.0 * std::numbers::pi * plane / spec.num_planes;
    double anomaly0 = 2.0 * std::numbers::pi * slot / spec.sats_per_plane +
                      plane * spec.phasing_offset_rad;
    double n = std::sqrt(kEarthMu / std::pow(spec.orbit_radius_m(), 3));
    double theta = anomaly0 + n * t;

    double r = spec.orbit_radius_m();
    // Position in the orbital plane, then rotate by inclination about x and RAAN about z.
    double xo = r * std::cos(theta);
    double yo = r * std::sin(theta);
    double ci = std::cos(spec.inclination_rad), si = std::sin(spec.inclination_rad);
    double cr = std::cos(raan), sr = std::sin(raan);
    Vec3 p;
    p.x = cr * xo - sr * ci * yo;
    p.y = sr * xo + cr * ci * yo;
    p.z = si * yo;
    return p;
}

// Inertial position of a ground site; the Earth rotates at the sidereal rate.
inline Vec3 ground_position(const ConstellationSpec& spec, const GroundSite& site, double t) {
    double lon = site.longitude_rad + kEarthSiderealRate * t;
    double clat = std::cos(site.latitude_rad);
    double r = spec.earth_radius_m;
    return {r * clat * std::cos(lon), r * clat * std::sin(lon), r * std::sin(site.latitude_rad)};
}

inline Vec3 node_position(const ConstellationSpec& spec, const std::vector<GroundSite>& sites,
                          NodeId node, double t) {
    if (node.kind == NodeKind::Satellite) return propagate(spec, node, t);
    if (node.index < 0 || static_cast<std::size_t>(node.index) >= sites.size())
        throw std::invalid_argument("unknown ground site index " + std::to_string(node.index));
    return ground_position(spec, sites[node.index], t);
}

// True iff the segment a-b clears the Earth sphere. An endpoint may sit
// exactly on the sphere (ground stations), so the test carries a 1 m slack.
inline bool line_of_sight(const Vec3& a, const Vec3& b, double earth_radius_m) {
    Vec3 d = b - a;
    double dd = dot(d, d);
    double min_dist;
    if (dd == 0.0) {
        min_dist = norm(a);
    } else {
        double s = -dot(a, d) / dd;
        if (s < 0.0) s = 0.0;
        if (s > 1.0) s = 1.0;
        min_dist = norm(a + s * d);
    }
    return min_dist >= earth_radius_m - 1.0;
}

// Range threshold is inclusive.
inline bool link_feasible(const ConstellationSpec& spec, const std::vector<GroundSite>& sites,
                          NodeId a, NodeId b, double t, double max_range_m) {
    if (a == b) throw std::invalid_argument("link_feasible requires distinct nodes");
    Vec3 pa = node_position(spec, sites, a, t);
    Vec3 pb = node_position(spec, sites, b, t);
    if (distance(pa, pb) > max_range_m) return false;
    return line_of_sight(pa, pb, spec.earth_radius_m);
}

inline std::string node_name(const std::vector<GroundSite>& sites, NodeId node) {
    if (node.kind == NodeKind::Satellite) return "sat-" + std::to_string(node.index);
    if (node.index >= 0 && static_cast<std::size_t>(node.index) < sites.size())
        return "ground-" + sites[node.index].name;
    return "ground-?" + std::to_string(node.index);
}

// Accepts "sat-<i>" or "ground-<name>" with <name> from the configured sites.
inline NodeId parse_node(const ConstellationSpec& spec, const std::vector<GroundSite>& sites,
                         const std::string& name) {
    if (name.rfind("sat-", 0) == 0) {
        int idx = std::stoi(name.substr(4));
        if (idx < 0 || idx >= spec.num_satellites())
            throw std::invalid_argument("unknown satellite: " + name);
        return {NodeKind::Satellite, idx};
    }
    if (name.rfind("ground-", 0) == 0) {
        std::string site = name.substr(7);
        for (std::size_t i = 0; i < sites.size(); ++i) {
            if (sites[i].name == site) return {NodeKind::Ground, static_cast<int>(i)};
        }
        throw std::invalid_argument("unknown ground site: " + name);
    }
    throw std::invalid_argument("node names look like sat-<i> or ground-<name>: " + name);
}

} // namespace leoq
