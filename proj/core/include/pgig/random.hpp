#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

#include "pgig/tensor.hpp"

namespace pgig {

/// splitmix64 mix of (seed, stream); used to derive independent child seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded pseudorandom source.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
/// Uniform reals take the top 53 bits of one draw, giving [0, 1).
/// Gaussians use the Box–Muller transform on two uniforms, u1 mapped to (0, 1];
/// the sine branch is cached and returned by the next call.
///
/// Single owner; split work across threads with child().
class RandomSource {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+box-muller";

  explicit RandomSource(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  std::string_view algorithm() const noexcept { return kAlgorithm; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  /// Uniform integer in [0, n) by rejection sampling. n must be positive.
  std::size_t below(std::size_t n);
  double standard_normal();
  double normal(double mu, double sigma);

  RandomSource child(std::uint64_t stream) const { return RandomSource(derive_seed(seed_, stream)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// n draws from N(mu, sigma²). sigma == 0 yields exactly mu.
Tensor gaussian(RandomSource& source, double mu, double sigma, std::size_t n);

/// n draws from U[0, 1).
Tensor uniform(RandomSource& source, std::size_t n);

}  // namespace pgig
