#pragma once

// Portable seeded streams. std::mt19937_64 and std::seed_seq have fully
// specified output, unlike the standard distributions, so uniform variates
// are formed from the raw 64-bit output here.

#include <cstdint>
#include <random>

namespace nvdnp {

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Engine(seq);
}

/// Seed of sub-stream `index` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  Engine e = make_engine(master_seed, index + 1);
  return e();
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

}  // namespace nvdnp
