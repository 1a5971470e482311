#pragma once

#include <cstdint>
#include <random>

namespace trapsim {

// splitmix64 finalizer; used to derive independent RNG streams from a
// run seed plus structural tags (node id, tick index, ...).
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed) { return mix64(seed); }

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, Rest... rest) {
    return derive_seed(mix64(seed ^ mix64(tag)), rest...);
}

template <typename... Tags>
std::mt19937_64 make_rng(std::uint64_t seed, Tags... tags) {
    return std::mt19937_64(derive_seed(seed, static_cast<std::uint64_t>(tags)...));
}

// Stream tags, so unrelated draws never share a stream.
namespace rng_stream {
constexpr std::uint64_t harvest = 0x01;
constexpr std::uint64_t channel = 0x02;
constexpr std::uint64_t node_setup = 0x03;
constexpr std::uint64_t backoff = 0x04;
}  // namespace rng_stream

}  // namespace trapsim
