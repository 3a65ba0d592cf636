#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pgig/network.hpp"
#include "pgig/tensor.hpp"

namespace pgig {

/// Recorded (layer input, pre-activation) pairs for one layer.
struct LayerSamples {
  std::vector<Tensor> inputs;
  std::vector<Tensor> outputs;
};

/// Per-layer samples gathered over a dataset, example order preserved.
struct PatternBatch {
  std::vector<LayerSamples> layers;

  std::size_t size() const { return layers.empty() ? 0 : layers.front().inputs.size(); }
};

struct LayerPattern {
  Tensor pattern;           ///< (out, in); rows of invalid neurons are zero
  std::vector<bool> valid;  ///< one flag per neuron
  std::vector<std::size_t> regime_count;
};

struct PatternSet {
  std::vector<LayerPattern> layers;

  std::size_t invalid_count() const;
  std::size_t neuron_count() const;
};

/// Which examples E[ŷ] averages over. The numerator's other expectations are
/// always taken over the positive regime.
enum class OutputMeanScope { PositiveRegime, FullBatch };

struct PatternOptions {
  OutputMeanScope output_mean = OutputMeanScope::PositiveRegime;
  /// Linear layers have no firing set; by default they average over the whole
  /// batch. Set to restrict them to w·x + b > 0 as well.
  bool gate_linear_layers = false;
  double denominator_tolerance = 1e-12;
};

PatternBatch collect_batch(const Network& net, std::span<const Tensor> dataset);

/// Pattern for every neuron of one layer:
///
///   a   = E₊[x ŷ] − E₊[x] E[ŷ]
///   p   = a / (wᵀ a)
///
/// where E₊ runs over examples with w·x + b > 0 (ReLU layers; see options) and
/// ŷ is the neuron's pre-activation. Neurons with an empty regime or
/// |wᵀ a| < tolerance are flagged invalid and given a zero row.
LayerPattern estimate_layer_pattern(const LayerSamples& samples, const Layer& layer,
                                    const PatternOptions& options = {});

/// Requires at least two examples.
PatternSet estimate_patterns(const PatternBatch& batch, const Network& net,
                             const PatternOptions& options = {});

Network attach_patterns(const Network& net, const PatternSet& patterns);

}  // namespace pgig
