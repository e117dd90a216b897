#ifndef QHEDGE_RNG_HPP_
#define QHEDGE_RNG_HPP_

#include <cstdint>
#include <random>

namespace qhedge {

using RngEngine = std::mt19937_64;

// SplitMix64 step; used to derive well-separated seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based per-path seed: independent of worker assignment, so a
// parallel run reproduces the serial one bit for bit.
inline std::uint64_t path_seed(std::uint64_t base_seed, std::uint64_t path_index) {
  return splitmix64(splitmix64(base_seed) ^ splitmix64(path_index + 1));
}

inline RngEngine make_path_engine(std::uint64_t base_seed, std::uint64_t path_index) {
  return RngEngine(path_seed(base_seed, path_index));
}

}  // namespace qhedge

#endif  // QHEDGE_RNG_HPP_
