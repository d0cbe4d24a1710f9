#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <stdexcept>

#include "leoq/quad.hpp"
#include "leoq/rng.hpp"

namespace leoq {

enum class LinkKind { ISL, Downlink };

// Statistical channel parameters. The paper's d^-gamma terms carry no unit
// convention, so distances enter as (d / d_ref_m)^-gamma; d_ref_m is the one
// knob fixing the normalization.
struct LinkPhysics {
    double gamma = 2.0;            // path loss exponent
    double p_t = 50.0;             // transmit power, W
    double n0 = 1e-9;              // noise power, W
    double omega = 1.0;            // pointing distribution scale
    int chi_n = 2;                 // pointing distribution degrees of freedom
    double alpha_turb = 2.1;       // gamma-gamma shape
    double beta_turb = 2.1;        // gamma-gamma shape
    double fidelity_threshold = 0.8;
    double d_ref_m = 1.0;

    void validate() const {
        if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
        if (!(p_t > 0.0)) throw std::invalid_argument("p_t must be positive");
        if (!(n0 > 0.0)) throw std::invalid_argument("n0 must be positive");
        if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
        if (chi_n < 1) throw std::invalid_argument("chi_n must be >= 1");
        if (!(alpha_turb > 0.0) || !(beta_turb > 0.0))
            throw std::invalid_argument("turbulence shapes must be positive");
        if (!(fidelity_threshold > 0.25) || !(fidelity_threshold < 1.0))
            throw std::invalid_argument("fidelity threshold must lie in (1/4, 1)");
        if (!(d_ref_m > 0.0)) throw std::invalid_argument("d_ref must be positive");
    }
};

struct MemoryModel {
    double t_c = 300.0; // coherence time, s

    void validate() const {
        if (!(t_c > 0.0)) throw std::invalid_argument("coherence time must be positive");
    }
};

// F = (1 + 3W)/4
inline double fidelity_from_werner(double w) {
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("werner parameter must be in [0,1]");
    return (1.0 + 3.0 * w) / 4.0;
}

// SNR_T = W / (1 - W)
inline double snr_from_werner(double w) {
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("werner parameter must be in [0,1]");
    if (w == 1.0) throw std::invalid_argument("werner parameter 1 has infinite SNR");
    return w / (1.0 - w);
}

// F = (1 + 4 SNR)/(4 + 4 SNR)
inline double fidelity_from_snr(double snr) {
    if (snr < 0.0) throw std::invalid_argument("SNR must be nonnegative");
    if (std::isinf(snr)) return 1.0;
    return (1.0 + 4.0 * snr) / (4.0 + 4.0 * snr);
}

// Inverse of fidelity_from_snr; W = snr/(1+snr). Tolerates snr = inf.
inline double werner_from_snr(double snr) {
    if (snr < 0.0) throw std::invalid_argument("SNR must be nonnegative");
    if (std::isinf(snr)) return 1.0;
    return snr / (1.0 + snr);
}

// beta = (4*Gamma - 1)/(4 - 4*Gamma)
inline double snr_threshold(double gamma_fid) {
    if (gamma_fid < 0.25 || gamma_fid >= 1.0)
        throw std::invalid_argument("fidelity threshold must lie in [1/4, 1)");
    return (4.0 * gamma_fid - 1.0) / (4.0 - 4.0 * gamma_fid);
}

// eta = beta * N0 * (d/d_ref)^gamma / P_T
inline double eta_threshold(double d_m, const LinkPhysics& phys) {
    if (!(d_m > 0.0)) throw std::invalid_argument("distance must be positive");
    double beta = snr_threshold(phys.fidelity_threshold);
    return beta * phys.n0 * std::pow(d_m / phys.d_ref_m, phys.gamma) / phys.p_t;
}

// U = exp(-t/t_c)
inline double memory_utility(double t, const MemoryModel& mem) {
    if (t < 0.0) throw std::invalid_argument("storage time must be nonnegative");
    return std::exp(-t / mem.t_c);
}

// Gamma(shape n/2, scale omega) density for the pointing gain h^2.
inline double pointing_pdf(double z, int n, double omega) {
    if (z < 0.0) return 0.0;
    double k = 0.5 * n;
    if (z == 0.0) return k > 1.0 ? 0.0 : (k == 1.0 ? 1.0 / omega : std::numeric_limits<double>::infinity());
    return std::pow(z, k - 1.0) * std::exp(-z / omega) / (std::pow(omega, k) * std::tgamma(k));
}

// Gamma-gamma density with unit mean: note the y exponent (alpha+beta)/2 - 1,
// the normalizing form of the cited distribution.
inline double turbulence_pdf(double y, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("turbulence shapes must be positive");
    if (y <= 0.0) return 0.0;
    double s = 0.5 * (alpha + beta);
    double ab = alpha * beta;
    double z = 2.0 * std::sqrt(ab * y);
    // log-space to keep large-shape cases finite
    double logc = std::log(2.0) + s * std::log(ab) - std::lgamma(alpha) - std::lgamma(beta);
    double k = std::cyl_bessel_k(std::abs(alpha - beta), z);
    if (k <= 0.0) return 0.0;
    return std::exp(logc + (s - 1.0) * std::log(y) + std::log(k));
}

// Upper truncation point beyond which the gamma-gamma density carries
// negligible mass (argument of K reaches ~80).
inline double turbulence_tail_cutoff(double alpha, double beta) {
    return std::max(50.0, 1600.0 / (alpha * beta));
}

inline double pointing_cdf(double x, int n, double omega) {
    if (x <= 0.0) return 0.0;
    if (n == 2) return 1.0 - std::exp(-x / omega);
    double lo = 1e-14;
    return integrate([&](double z) { return pointing_pdf(z, n, omega); }, lo, x, 1e-13);
}

// P_out = P(h^2 < eta); closed form 1 - exp(-eta/omega) when n = 2,
// quadrature over the pointing pdf otherwise.
inline double outage_isl_from_eta(double eta, const LinkPhysics& phys) {
    if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
    if (eta == 0.0) return 0.0;
    return pointing_cdf(eta, phys.chi_n, phys.omega);
}

inline double outage_isl(double d_m, const LinkPhysics& phys) {
    return outage_isl_from_eta(eta_threshold(d_m, phys), phys);
}

// P_out = P(h^2 * Y < eta) = int f_Y(y) F_h(eta/y) dy, adaptive quadrature.
inline double outage_downlink_from_eta(double eta, const LinkPhysics& phys) {
    if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
    if (eta == 0.0) return 0.0;
    double ymax = turbulence_tail_cutoff(phys.alpha_turb, phys.beta_turb);
    auto integrand = [&](double y) {
        if (y <= 0.0) return 0.0;
        double fy = turbulence_pdf(y, phys.alpha_turb, phys.beta_turb);
        if (fy == 0.0) return 0.0;
        return fy * pointing_cdf(eta / y, phys.chi_n, phys.omega);
    };
    double p = integrate(integrand, 1e-12, ymax, 1e-11);
    return std::clamp(p, 0.0, 1.0);
}

inline double outage_downlink(double d_m, const LinkPhysics& phys) {
    return outage_downlink_from_eta(eta_threshold(d_m, phys), phys);
}

// Downlink outage keyed by 1 m distance buckets; safe for concurrent reads.
class DownlinkOutageCache {
  public:
    explicit DownlinkOutageCache(const LinkPhysics& phys) : phys_(phys) {}

    double operator()(double d_m) const {
        long long bucket = llround(d_m);
        {
            std::shared_lock lock(mutex_);
            auto it = cache_.find(bucket);
            if (it != cache_.end()) return it->second;
        }
        double p = outage_downlink(static_cast<double>(bucket), phys_);
        std::unique_lock lock(mutex_);
        return cache_.emplace(bucket, p).first->second;
    }

  private:
    LinkPhysics phys_;
    mutable std::shared_mutex mutex_;
    mutable std::map<long long, double> cache_;
};

// eta_x^t: (d/d_ref)^-gamma * h^2 (* Y on the downlink). Raw value; callers
// clamp to [0,1] when using it as a success probability.
inline double transmittance(double d_m, LinkKind kind, double h2, double y,
                            const LinkPhysics& phys) {
    if (!(d_m > 0.0)) throw std::invalid_argument("distance must be positive");
    double v = std::pow(d_m / phys.d_ref_m, -phys.gamma) * h2;
    if (kind == LinkKind::Downlink) v *= y;
    return v;
}

inline double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

// Depolarizing channels compose multiplicatively; the empty list is the
// identity channel.
inline double compose_werner(std::span<const double> ws) {
    double w = 1.0;
    for (double wi : ws) {
        if (wi < 0.0 || wi > 1.0) throw std::invalid_argument("werner parameter must be in [0,1]");
        w *= wi;
    }
    return w;
}

// U_x = fid^w_f * mem^w_m
inline double link_utility(double fid_utility, double mem_utility, double w_f, double w_m) {
    if (!(fid_utility > 0.0) || fid_utility > 1.0 || !(mem_utility > 0.0) || mem_utility > 1.0)
        throw std::invalid_argument("utilities must lie in (0,1]");
    return std::pow(fid_utility, w_f) * std::pow(mem_utility, w_m);
}

// h^2 ~ Gamma(n/2, omega)
inline double sample_pointing(Rng& rng, int n, double omega) {
    std::gamma_distribution<double> g(0.5 * n, omega);
    return g(rng);
}

// Y = product of two independent unit-mean Gamma variates with shapes alpha, beta.
inline double sample_turbulence(Rng& rng, double alpha, double beta) {
    std::gamma_distribution<double> ga(alpha, 1.0 / alpha);
    std::gamma_distribution<double> gb(beta, 1.0 / beta);
    return ga(rng) * gb(rng);
}

// Deterministic link SNR with the random gains at their means
// (E[h^2] = n*omega/2, E[Y] = 1); W = S/(1+S) computed stably.
inline double deterministic_link_snr(double d_m, LinkKind kind, const LinkPhysics& phys) {
    double mean_h2 = 0.5 * phys.chi_n * phys.omega;
    return transmittance(d_m, kind, mean_h2, 1.0, phys) * phys.p_t / phys.n0;
}

inline double deterministic_link_fidelity(double d_m, LinkKind kind, const LinkPhysics& phys) {
    return fidelity_from_snr(deterministic_link_snr(d_m, kind, phys));
}

inline double deterministic_link_werner(double d_m, LinkKind kind, const LinkPhysics& phys) {
    return werner_from_snr(deterministic_link_snr(d_m, kind, phys));
}

// 1 - P_out at the threshold eta for this link kind.
inline double fidelity_outage_utility(double d_m, LinkKind kind, const LinkPhysics& phys,
                                      const DownlinkOutageCache* cache = nullptr) {
    if (kind == LinkKind::ISL) return 1.0 - outage_isl(d_m, phys);
    double p = cache ? (*cache)(d_m) : outage_downlink(d_m, phys);
    return 1.0 - p;
}

} // namespace leoq
