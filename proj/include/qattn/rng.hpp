#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qattn {

// splitmix64; used to derive independent sub-seeds from one master seed so
// that every random stream (init, shuffle, dropout, solver, noise) is
// reproducible and none of them share state.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t a = 0, uint64_t b = 0) {
    uint64_t h = master;
    for (char c : tag) h = splitmix64(h ^ static_cast<uint64_t>(static_cast<unsigned char>(c)));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return h;
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace qattn
