#pragma once

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "leoq/simkit.hpp"

namespace leoq {

// Raised for any malformed or out-of-range configuration; the CLI maps it to
// exit code 2. Messages name the offending key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace cfgdetail {

using nlohmann::json;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

class Section {
  public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
    }

    ~Section() = default;

    // unknown keys are rejected once all known keys have been pulled
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key()))
                throw ConfigError("unknown key " + path_ + "." + it.key());
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError("missing key " + path_ + "." + key);
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(path_ + "." + key + " must be a number");
        return v.get<double>();
    }

    double number_or(const std::string& key, double fallback) {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        return number(key);
    }

    double positive(const std::string& key) {
        double v = number(key);
        if (!(v > 0.0)) throw ConfigError(path_ + "." + key + " must be positive");
        return v;
    }

    long integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(path_ + "." + key + " must be an integer");
        return v.get<long>();
    }

    long integer_or(const std::string& key, long fallback) {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        return integer(key);
    }

    bool boolean_or(const std::string& key, bool fallback) {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(path_ + "." + key + " must be a boolean");
        return v.get<bool>();
    }

    std::string text(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(path_ + "." + key + " must be a string");
        return v.get<std::string>();
    }

    std::string text_or(const std::string& key, const std::string& fallback) {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        return text(key);
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(path_ + "." + key + " must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(path_ + "." + key + " must hold numbers only");
            out.push_back(e.get<double>());
        }
        return out;
    }

    const json& j() const { return j_; }
    const std::string& path() const { return path_; }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace cfgdetail

inline Scenario scenario_from_json(const nlohmann::json& root) {
    using cfgdetail::Section;
    using cfgdetail::deg2rad;

    Scenario sc;
    Section top(root, "config");

    {
        Section c(top.raw("constellation"), "constellation");
        sc.constellation.num_planes = static_cast<int>(c.integer("num_planes"));
        sc.constellation.sats_per_plane = static_cast<int>(c.integer("sats_per_plane"));
        sc.constellation.altitude_m = c.positive("altitude_km") * 1000.0;
        sc.constellation.inclination_rad = deg2rad(c.number("inclination_deg"));
        sc.constellation.earth_radius_m = c.number_or("earth_radius_km", 6371.0) * 1000.0;
        sc.constellation.phasing_offset_rad = deg2rad(c.number_or("phasing_offset_deg", 0.0));
        c.finish();
    }
    {
        const auto& arr = top.raw("ground_sites");
        if (!arr.is_array()) throw ConfigError("ground_sites must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Section s(arr[i], "ground_sites[" + std::to_string(i) + "]");
            GroundSite site;
            site.name = s.text("name");
            site.latitude_rad = deg2rad(s.number("latitude_deg"));
            site.longitude_rad = deg2rad(s.number("longitude_deg"));
            s.finish();
            sc.sites.push_back(site);
        }
    }
    {
        Section p(top.raw("physics"), "physics");
        sc.physics.gamma = p.positive("path_loss_exponent");
        sc.physics.p_t = p.positive("p_t_watts");
        sc.physics.n0 = p.positive("n0_watts");
        sc.physics.omega = p.positive("omega_pointing");
        sc.physics.chi_n = static_cast<int>(p.integer("chi_squared_n"));
        sc.physics.alpha_turb = p.positive("alpha_turbulence");
        sc.physics.beta_turb = p.positive("beta_turbulence");
        sc.physics.fidelity_threshold = p.number("fidelity_threshold");
        sc.physics.d_ref_m = p.number_or("d_ref_km", 0.001) * 1000.0;
        p.finish();
    }
    {
        Section m(top.raw("memory"), "memory");
        sc.memory.t_c = m.positive("t_c_seconds");
        m.finish();
    }
    {
        Section pr(top.raw("protocol"), "protocol");
        sc.protocol.rate = pr.positive("rate_ebits_per_second");
        sc.protocol.p_source = pr.number("p_source");
        sc.protocol.p_bsm = pr.number("p_bsm");
        sc.protocol.p_mem_fail = pr.number("p_mem_fail");
        sc.protocol.modes = static_cast<int>(pr.integer_or("memory_modes", 1));
        sc.protocol.t_bsm = pr.positive("t_bsm_seconds");
        pr.finish();
    }
    {
        Section w(top.raw("weights"), "weights");
        sc.weight_fidelity = w.number("omega_fidelity");
        sc.weight_memory = w.number("omega_memory");
        w.finish();
    }
    {
        Section t(top.raw("topology"), "topology");
        sc.max_range_m = t.positive("max_range_km") * 1000.0;
        sc.horizon_margin = t.positive("horizon_margin_seconds");
        sc.sample_dt = t.positive("sample_dt_seconds");
        t.finish();
    }
    std::string src_name, dst_name, alt_src, alt_dst;
    {
        Section e(top.raw("endpoints"), "endpoints");
        src_name = e.text("source");
        dst_name = e.text("destination");
        // alternate endpoint pair; validated but not routed by default
        alt_src = e.text_or("alt_source", "");
        alt_dst = e.text_or("alt_destination", "");
        e.finish();
    }
    {
        Section s(top.raw("simulation"), "simulation");
        sc.transmission_times = s.numbers("transmission_times_seconds");
        if (s.has("coherence_sweep_seconds"))
            sc.coherence_sweep = s.numbers("coherence_sweep_seconds");
        sc.attempts = s.integer("attempts_per_point");
        sc.seed = static_cast<std::uint64_t>(s.integer("seed"));
        sc.channel_sampling = s.boolean_or("channel_sampling", true);
        std::string trailing = s.text_or("segmented_trailing", "literal");
        if (trailing == "literal") sc.trailing = SegmentedTrailing::Literal;
        else if (trailing == "reconciled") sc.trailing = SegmentedTrailing::Reconciled;
        else throw ConfigError("simulation.segmented_trailing must be literal or reconciled");
        s.finish();
    }
    top.finish();

    try {
        sc.source = parse_node(sc.constellation, sc.sites, src_name);
        sc.destination = parse_node(sc.constellation, sc.sites, dst_name);
        if (!alt_src.empty()) parse_node(sc.constellation, sc.sites, alt_src);
        if (!alt_dst.empty()) parse_node(sc.constellation, sc.sites, alt_dst);
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::string text = read_file(path);
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports byte offsets; convert to a line number
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    return scenario_from_json(root);
}

} // namespace leoq
