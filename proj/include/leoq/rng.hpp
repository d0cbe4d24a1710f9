#pragma once

#include <cstdint>
#include <random>

namespace leoq {

// splitmix64; used to derive independent stream seeds from (seed, index...)
// so results do not depend on thread count or evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(a));
    s = splitmix64(s ^ splitmix64(b + 0x517cc1b727220a95ULL));
    return splitmix64(s ^ splitmix64(c + 0x2545f4914f6cdd1dULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    return Rng(derive_seed(seed, a, b, c));
}

} // namespace leoq
