#pragma once
// Deterministic, cross-platform randomness. std::mt19937_64 is bit-exact by
// the standard; the distributions here are hand-rolled because the std
// distribution objects are implementation-defined.

#include <cstdint>
#include <random>

namespace hatlab {

inline uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-derived replica seed: no two replicas share a stream.
inline uint64_t replica_seed(uint64_t seed, uint64_t replica) {
  return splitmix64(splitmix64(seed) ^ splitmix64(replica * 0x9e3779b97f4a7c15ull + 1));
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t bits() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n) without modulo bias.
  uint64_t below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = eng_();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace hatlab
