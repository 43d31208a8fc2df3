#pragma once

#include <cstdint>
#include <random>

namespace zidrm {

// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministically combines a user seed with a stream index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// One random stream per (seed, stream) pair, fully specified by the C++
// standard (mt19937_64 + seed_seq), so output is identical across platforms
// and independent of how many streams run in parallel.  Uniforms take the
// top 53 bits; normals go through the inverse CDF so no distribution state
// is carried between calls.
class ReplicateRng {
 public:
  ReplicateRng(std::uint64_t seed, std::uint64_t stream);

  // Strictly inside (0,1).
  double uniform();
  double normal();
  // Uniform index in [0, n).
  std::uint32_t index(std::uint32_t n);

 private:
  std::mt19937_64 gen_;
};

}  // namespace zidrm
