#pragma once

// Portable seeded random streams.
//
// Every sampler here is implemented directly on top of xoshiro256** so that a
// given seed produces the same stream on every platform and standard library.
// (std::normal_distribution and friends are implementation-defined.)
//
// Constants:
//   splitmix64: increment 0x9E3779B97F4A7C15, multipliers 0xBF58476D1CE4E5B9
//               and 0x94D049BB133111EB, shifts 30/27/31.
//   xoshiro256**: output rotl(s1 * 5, 7) * 9, state update shifts 17 and 45.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace egrw {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();

 private:
  std::uint64_t state_;
};

/// Derives an independent seed for sub-stream `index` of `seed`, e.g. one
/// stream per image in an injector.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer in [0, bound), bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal (Marsaglia polar method, second variate cached).
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the boost U^(1/shape).
  double gamma(double shape);

 private:
  std::uint64_t s_[4];
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

/// k distinct indices from 0..n-1, uniformly without replacement, in the
/// order they were drawn.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

}  // namespace egrw
