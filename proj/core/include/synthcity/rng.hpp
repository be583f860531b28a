#ifndef SYNTHCITY_RNG_HPP
#define SYNTHCITY_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace synthcity {

// Deterministic PRNG used everywhere generation is seeded. The standard
// <random> distributions are implementation-defined, which would break the
// byte-identical reproducibility contracts across toolchains, so the few
// draws we need are implemented directly on top of splitmix64.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    uint64_t threshold = (0-n) % n;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  /// Poisson draw by Knuth's product method, split into chunks so exp()
  /// never underflows. Adequate for the small rates used for vegetation.
  int poisson(double lambda) {
    if (lambda <= 0) return 0;
    int count = 0;
    while (lambda > 500.0) {
      count += poisson_chunk(500.0);
      lambda -= 500.0;
    }
    return count + poisson_chunk(lambda);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  int poisson_chunk(double lambda) {
    double threshold = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > threshold);
    return k - 1;
  }

  uint64_t state_;
};

/// Order-sensitive 64-bit mixing for deriving child seeds.
inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2);
  z ^= b;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// FNV-1a over a string, folded with a seed. Used for keying RNG streams by
/// name (style ids, stage names) and for manifest parameter hashes.
inline uint64_t hash_str(uint64_t seed, std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return hash_combine(seed, h);
}

}  // namespace synthcity

#endif  // SYNTHCITY_RNG_HPP
