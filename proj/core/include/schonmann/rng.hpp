#pragma once

#include <cstdint>
#include <random>

namespace schonmann {

// Child-seed derivation: splitmix64 finalizer applied to
// master + (index+1) * 0x9E3779B97F4A7C15.  This exact function is part of
// the reproducibility contract (see README); every worker/draw/epoch stream
// is seeded through it, so any task can be regenerated in isolation.
constexpr uint64_t mix_seed(uint64_t master, uint64_t index) {
  uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic uniform source.  mt19937_64 output is fully specified by the
// standard; doubles are built from the top 53 bits so streams are
// bit-identical across platforms and never depend on
// std::uniform_real_distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed), seed_(seed) {}

  uint64_t raw() { return engine_(); }

  // in [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform integer in [0, n)
  uint64_t below(uint64_t n) { return engine_() % n; }

  int8_t fair_sign() { return (engine_() >> 63) ? int8_t{1} : int8_t{-1}; }

  uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  uint64_t seed_;
};

}  // namespace schonmann
