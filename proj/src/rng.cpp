#include "zidrm/rng.hpp"

#include "zidrm/errors.hpp"
#include "zidrm/math.hpp"

namespace zidrm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

ReplicateRng::ReplicateRng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  gen_ = std::mt19937_64(seq);
}

double ReplicateRng::uniform() {
  // (k + 0.5) / 2^53 with k in [0, 2^53): never exactly 0 or 1.
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

double ReplicateRng::normal() { return norm_quantile(uniform()); }

std::uint32_t ReplicateRng::index(std::uint32_t n) {
  if (n == 0) throw DomainError("ReplicateRng::index: n must be positive");
  auto i = static_cast<std::uint32_t>(uniform() * n);
  return i < n ? i : n - 1;
}

}  // namespace zidrm
