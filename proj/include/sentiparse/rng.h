#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sentiparse/errors.h"

namespace sentiparse {

// Deterministic randomness source shared by training and sampling code.
// Bounded draws and shuffles are implemented here instead of relying on
// std distributions, whose output is implementation defined.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  // uniform over [0, n)
  size_t uniform_index(size_t n) {
    if (n == 0) throw InternalError("uniform_index: empty range");
    uint64_t span = ~uint64_t{0} - ~uint64_t{0} % n;  // reject past the last full cycle
    uint64_t x = gen_();
    while (x >= span) x = gen_();
    return static_cast<size_t>(x % n);
  }

  // uniform in [0, 1)
  double uniform01() { return (gen_() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// stable seed derivation for sub-streams (per fold, per stage)
inline uint64_t derive_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sentiparse
