#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace invsyn {

// Seedable, splittable RNG.  Every run records its root seed; child generators
// are derived deterministically so parallel workers replay exactly.
class Rng {
public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(splitmix(seed)) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return gen_(); }

  // inclusive on both ends; rejection keeps the distribution exact and the
  // byte stream identical across standard libraries
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t range = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo);
    if (range == UINT64_MAX) return static_cast<int64_t>(next_u64());
    uint64_t n = range + 1;
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % n);
  }

  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs[static_cast<size_t>(uniform_int(0, static_cast<int64_t>(xs.size()) - 1))];
  }

  Rng split() {
    ++split_count_;
    return Rng(splitmix(seed_ ^ (0x9e3779b97f4a7c15ULL * split_count_)));
  }

  static uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

private:
  uint64_t seed_;
  uint64_t split_count_ = 0;
  std::mt19937_64 gen_;
};

}  // namespace invsyn
