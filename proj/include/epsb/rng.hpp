#pragma once

#include <cstdint>
#include <random>

namespace epsb {

/**
 * Per-replica random stream.
 *
 * The engine is std::mt19937_64 seeded through std::seed_seq from the pair
 * (seed, stream), so replica k of a run always sees the same numbers no matter
 * which worker executes it. Uniforms are built from the top 53 bits by hand
 * because std::uniform_real_distribution is implementation-defined.
 */
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate);

  /// Uniform integer in [0, k); k must be positive.
  std::uint64_t below(std::uint64_t k);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace epsb
