#include "pgig/random.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "pgig/error.hpp"

namespace pgig {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RandomSource::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t RandomSource::below(std::size_t n) {
  if (n == 0) throw ArgumentError("below(0): empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % bound);
}

double RandomSource::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double RandomSource::normal(double mu, double sigma) {
  if (!(sigma >= 0.0)) throw ArgumentError("normal: sigma must be >= 0, got " + std::to_string(sigma));
  return mu + sigma * standard_normal();
}

Tensor gaussian(RandomSource& source, double mu, double sigma, std::size_t n) {
  if (!(sigma >= 0.0)) throw ArgumentError("gaussian: sigma must be >= 0, got " + std::to_string(sigma));
  if (n == 0) throw ArgumentError("gaussian: n must be >= 1");
  std::vector<double> out(n);
  for (double& v : out) v = source.normal(mu, sigma);
  return Tensor::vector(std::move(out));
}

Tensor uniform(RandomSource& source, std::size_t n) {
  std::vector<double> out(n);
  for (double& v : out) v = source.uniform();
  return Tensor::vector(std::move(out));
}

}  // namespace pgig
