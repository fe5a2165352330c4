#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

#include "cayley/types.hpp"

namespace cayley {

/// Random stream: a 64-bit Mersenne Twister (std::mt19937_64) seeded from
/// SplitMix64(seed, stream). Uniform variates take the top 53 bits; normal
/// variates use Boost's ziggurat sampler. Both are fully specified, so draws
/// are reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Uniform on [0, 1).
  double uniform();
  double normal();
  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cayley
