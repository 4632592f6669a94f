#pragma once

#include <cstdint>
#include <string_view>

namespace tradeslab {

// Seedable deterministic generator: xoshiro256** seeded through splitmix64.
// The algorithm name is recorded in checkpoint metadata so runs stay
// reproducible across versions.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "xoshiro256**";

  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Box-Muller. std must be >= 0; std == 0 returns mean exactly.
  double gaussian(double mean, double std);

  // -1 or +1 with equal probability.
  double rademacher();

  // Derive an independent stream from this generator's seed and a stream id.
  Rng fork(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stateless 64-bit mix, used to derive per-batch / per-epoch seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace tradeslab
