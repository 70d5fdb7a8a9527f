#pragma once

// Seed splitting. Every consumer of randomness derives its generator from the
// root seed, a stream id and an index, so results do not depend on the order
// in which samples are drawn.

#include <cstdint>
#include <random>

namespace polyharm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t split_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(root ^ splitmix64(stream)) + index);
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::uint64_t stream, std::uint64_t index) {
  return std::mt19937_64(split_seed(root, stream, index));
}

// Stream ids.
inline constexpr std::uint64_t kStreamCat1Sphere = 1;
inline constexpr std::uint64_t kStreamCat1Tree = 2;
inline constexpr std::uint64_t kStreamQuadrilateral = 3;
inline constexpr std::uint64_t kStreamEstimate = 4;
inline constexpr std::uint64_t kStreamMidpoint = 5;
inline constexpr std::uint64_t kStreamConeBounds = 6;
inline constexpr std::uint64_t kStreamHolderPairs = 7;
inline constexpr std::uint64_t kStreamTreeRestarts = 8;
inline constexpr std::uint64_t kStreamPerturbation = 9;

}  // namespace polyharm
