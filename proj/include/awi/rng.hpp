#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace awi {

// splitmix64. Small, fast, and identical everywhere; we avoid <random>
// distributions because their outputs differ across standard libraries.
struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed = 1) : state(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53 bits
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform index in [0, n); n must be positive
  size_t index(size_t n) {
    size_t i = size_t(uniform() * double(n));
    return i < n ? i : n - 1;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }
};

}  // namespace awi
