#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace fcc {

/// SplitMix64 finalizer; used to derive independent seeds for sub-streams.
std::uint64_t splitmix64(std::uint64_t x);

/// Reproducible random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so the
/// conversions below are spelled out: uniform() takes the top 53 bits,
/// normal() is Box-Muller on two uniforms (one normal per call), below() is
/// rejection sampling on the raw 64-bit output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fcc
