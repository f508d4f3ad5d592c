#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "core/error.hpp"

namespace peril {

// splitmix64 step; used to derive independent child seeds from a master seed.
// The constants are the reference ones from Vigna's splitmix64.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4a2fa79cbf2e8ULL;
  return z ^ (z >> 31);
}

// Deterministic seed derivation: children of (seed, a, b) never collide with
// children of a different tuple in practice, and the mapping is stable across
// platforms (pure integer arithmetic).
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0) {
  uint64_t s = seed;
  uint64_t h = splitmix64(s);
  s ^= a * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL;
  h ^= splitmix64(s);
  s ^= b * 0xc2b2ae3d27d4eb4fULL + 0x452821e638d01377ULL;
  h ^= splitmix64(s);
  return h;
}

// FNV-1a over bytes. Used wherever hashed text feeds deterministic behavior
// (the mock backend); std::hash is implementation-defined and must not leak
// into anything reproducible.
inline uint64_t fnv1a(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seeded RNG with platform-stable sampling. The engine (mt19937_64) has a
// fully specified output sequence; the distribution helpers below are written
// out by hand because std::uniform_*_distribution is allowed to differ
// between standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). The floor construction is monotone in the
  // underlying draw and biased by at most 2^-53 per outcome, far below
  // anything our statistical tests can see.
  int64_t uniform_int(int64_t n) {
    if (n <= 0) fail(ErrorKind::Logic, "uniform_int requires n > 0");
    double u = next_double();
    int64_t v = static_cast<int64_t>(u * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return next_double() < p;
  }

  int roll_d6() { return static_cast<int>(uniform_int(6)) + 1; }

  // Index draw proportional to non-negative weights. Total weight 0 means
  // uniform. One random number is consumed either way.
  size_t weighted_choice(const std::vector<double>& weights) {
    if (weights.empty()) fail(ErrorKind::Logic, "weighted_choice on empty set");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) fail(ErrorKind::Logic, "weighted_choice needs weights >= 0");
      total += w;
    }
    if (total <= 0.0) return static_cast<size_t>(uniform_int(static_cast<int64_t>(weights.size())));
    double u = next_double() * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;  // u landed on the rounding edge of the last bucket
  }

  // Fisher-Yates shuffle using the stable uniform_int above.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(static_cast<int64_t>(i)));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace peril
