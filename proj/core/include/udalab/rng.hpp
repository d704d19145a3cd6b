#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace udalab::rng {

// Stream-splitting and seed mixing use SplitMix64; bulk generation uses
// xoshiro256++. Both algorithms are fixed so that any language can reproduce
// the byte-exact sample streams (see README, "Reproducibility").

/// SplitMix64 step: advances the state and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Mixes an ordered list of 64-bit parts into one seed (SplitMix64 chain).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

/// Derives the seed of sub-stream `index` of a master seed.
std::uint64_t substream(std::uint64_t master, std::uint64_t index);

/// xoshiro256++ with SplitMix64 seeding.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform double in [0,1): top 53 bits of next().
  double uniform();
  /// Uniform double in [lo,hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0,n). Uses rejection to remove modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller, z = sqrt(-2 ln u1) cos(2 pi u2).
  /// The sine partner is discarded; u1 is drawn from (0,1].
  double normal();
  double normal(double mean, double sd);

 private:
  std::array<std::uint64_t, 4> s_;
};

}  // namespace udalab::rng
