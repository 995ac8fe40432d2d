#pragma once

#include <cstdint>

namespace rigidtrack {

// splitmix64: tiny, portable, identical output on every platform. Used
// wherever reproducibility across runs and hosts matters; the standard
// library engines leave distribution behavior implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform integer in [0, n). n must be positive; modulo bias is
  // irrelevant at the sizes used here.
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  // Derives an independent stream; feeding the same label always yields the
  // same child no matter how much the parent has been consumed.
  Rng fork(uint64_t label) const {
    Rng child(state_ ^ (0x632be59bd9b4e019ULL * (label + 1)));
    child.next_u64();
    return child;
  }

 private:
  uint64_t state_;
};

}  // namespace rigidtrack
