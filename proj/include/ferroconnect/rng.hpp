#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace ferroconnect::rng {

// All randomness in a run flows from one base seed, split per module/sample by
// fixed labels so that concurrent evaluation order cannot change the streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, const std::string& label, std::uint64_t index = 0) {
    std::uint64_t h = base;
    for (const char c : label) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return splitmix64(h ^ index);
}

inline std::mt19937_64 engine(std::uint64_t base, const std::string& label, std::uint64_t index = 0) {
    return std::mt19937_64(derive_seed(base, label, index));
}

}  // namespace ferroconnect::rng
