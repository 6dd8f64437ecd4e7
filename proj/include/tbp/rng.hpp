#pragma once

#include <cstdint>

// Self-contained xoshiro256++ generator with splitmix64 seeding. Keeping the
// normal variate algorithm in-house (Marsaglia polar) makes streams
// bit-reproducible across standard libraries, which the sample-set
// determinism guarantees rely on.
namespace tbp {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed); }

  // Independent substream keyed by (seed, stream). Used to give every base
  // chain entry its own generator so parallel scheduling cannot reorder draws.
  static Rng substream(std::uint64_t seed, std::uint64_t stream);

  void reseed(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on (0,1); never returns 0 or 1.
  double uniform();

  // Uniform on (-1,1), cheap two-sided variant for the polar method.
  double uniform_sym();

  // Standard normal via Marsaglia polar; caches the spare deviate.
  double normal();

 private:
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tbp
