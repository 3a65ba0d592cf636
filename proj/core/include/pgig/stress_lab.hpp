#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pgig/attribution.hpp"
#include "pgig/network.hpp"
#include "pgig/patterns.hpp"
#include "pgig/random.hpp"
#include "pgig/tensor.hpp"

namespace pgig::stress {

/// The plateau-plus-distractor test: y = 1 − ReLU(1 − z) with inputs
/// x = (z, 0) + (ε, ε), ε ~ N(mu, sigma²) drawn once per grid point.
struct StressConfig {
  double z_start = -2.0;
  double z_end = 2.0;  ///< inclusive
  double z_step = 0.01;
  double noise_mu = 0.0;
  double noise_sigma = 0.25;
  std::uint64_t random_seed = 42;
  std::size_t steps = 25;  ///< IG/PGIG path points

  void validate() const;
  /// z_start + i·z_step for i = 0 … round((z_end − z_start)/z_step).
  std::vector<double> grid() const;
};

struct StressPoint {
  double z = 0.0;
  double y = 0.0;
  Tensor signal;
  Tensor distractor;
  Tensor input;
};

struct StressDataset {
  std::vector<StressPoint> points;

  std::vector<Tensor> inputs() const;
};

/// Two dense layers: (−1, 1) with bias 1 and ReLU, then (−1) with bias 1, raw
/// output. Computes 1 − ReLU(1 − x₁ + x₂), which cancels any (ε, ε).
Network build_stress_model();

StressDataset generate_dataset(const StressConfig& cfg, RandomSource& rng);

/// p⁽¹⁾ = (−1, 0), p⁽²⁾ = (−1); both neurons valid.
PatternSet analytic_patterns();

struct StressRow {
  double z = 0.0;
  Tensor ig;
  Tensor pa;
  Tensor pgig;
};

struct StressComparison {
  StressConfig config;
  StressDataset data;
  std::vector<StressRow> rows;
};

/// IG, PatternAttribution and PGIG at every point of a freshly generated
/// dataset, explained on the analytic model with the analytic patterns.
/// IG and PGIG use the zero baseline and seed 1.0; PA seeds with ŷ.
StressComparison run_stress_comparison(const StressConfig& cfg);

struct PropertyCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// The qualitative claims of the stress test, evaluated on one comparison.
std::vector<PropertyCheck> check_properties(const StressComparison& cmp);

/// Writes one (abscissa, value) CSV per panel and returns the file names:
/// z, y, signal, distractor, X, then IG/PA/PGIG × signal/distractor.
std::vector<std::string> write_panels(const StressComparison& cmp, const std::filesystem::path& dir);

void write_report(const std::vector<PropertyCheck>& checks, const std::filesystem::path& path);

}  // namespace pgig::stress
