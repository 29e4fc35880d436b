#pragma once

#include <cstdint>
#include <random>

namespace cqed {

// splitmix64; used to decorrelate (seed, stream id) pairs before seeding the
// per-stream engine, so trajectory/resample streams are independent.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(uint64_t seed, uint64_t stream) {
  std::seed_seq seq{mix64(seed), mix64(seed ^ (stream + 0x517cc1b727220a95ull)),
                    mix64(stream), mix64(seed + 0x2545f4914f6cdd1dull * (stream + 1))};
  return std::mt19937_64(seq);
}

}  // namespace cqed
