#include "pgig/patterns.hpp"

#include <cmath>
#include <string>

#include "pgig/error.hpp"

namespace pgig {

std::size_t PatternSet::invalid_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) {
    for (bool v : l.valid) n += v ? 0 : 1;
  }
  return n;
}

std::size_t PatternSet::neuron_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.valid.size();
  return n;
}

PatternBatch collect_batch(const Network& net, std::span<const Tensor> dataset) {
  if (dataset.empty()) throw ArgumentError("collect_batch: empty dataset");
  PatternBatch batch;
  batch.layers.resize(net.depth());
  for (auto& l : batch.layers) {
    l.inputs.reserve(dataset.size());
    l.outputs.reserve(dataset.size());
  }
  for (const Tensor& x : dataset) {
    ForwardTrace trace = forward(net, x);
    for (std::size_t k = 0; k < net.depth(); ++k) {
      batch.layers[k].inputs.push_back(std::move(trace.layers[k].input));
      batch.layers[k].outputs.push_back(std::move(trace.layers[k].pre_activation));
    }
  }
  return batch;
}

LayerPattern estimate_layer_pattern(const LayerSamples& samples, const Layer& layer,
                                    const PatternOptions& options) {
  const std::size_t n = samples.inputs.size();
  const std::size_t in = layer.in_dim();
  const std::size_t out = layer.out_dim();
  if (samples.outputs.size() != n) throw DimensionError("pattern samples: input/output counts differ");
  for (std::size_t e = 0; e < n; ++e) {
    if (samples.inputs[e].size() != in || samples.outputs[e].size() != out) {
      throw DimensionError("pattern samples: example " + std::to_string(e) + " does not match layer " +
                           std::to_string(out) + "x" + std::to_string(in));
    }
  }

  const bool gated = layer.activation == Activation::ReLU || options.gate_linear_layers;
  const auto w = layer.weights.values();

  std::vector<double> pattern(out * in, 0.0);
  LayerPattern result{Tensor(), std::vector<bool>(out, false), std::vector<std::size_t>(out, 0)};

  std::vector<double> sum_x(in), sum_xy(in), a(in);
  for (std::size_t j = 0; j < out; ++j) {
    const auto wj = w.subspan(j * in, in);
    std::fill(sum_x.begin(), sum_x.end(), 0.0);
    std::fill(sum_xy.begin(), sum_xy.end(), 0.0);
    double sum_y = 0.0;
    double sum_y_all = 0.0;
    std::size_t count = 0;

    for (std::size_t e = 0; e < n; ++e) {
      const auto x = samples.inputs[e].values();
      const double y = samples.outputs[e][j];
      sum_y_all += y;
      if (gated) {
        double pre = 0.0;
        for (std::size_t i = 0; i < in; ++i) pre += wj[i] * x[i];
        if (!(pre + layer.bias[j] > 0.0)) continue;
      }
      ++count;
      sum_y += y;
      for (std::size_t i = 0; i < in; ++i) {
        sum_x[i] += x[i];
        sum_xy[i] += x[i] * y;
      }
    }
    result.regime_count[j] = count;
    if (count == 0) continue;

    const double c = static_cast<double>(count);
    const double mean_y = options.output_mean == OutputMeanScope::PositiveRegime
                              ? sum_y / c
                              : sum_y_all / static_cast<double>(n);
    double denom = 0.0;
    for (std::size_t i = 0; i < in; ++i) {
      a[i] = sum_xy[i] / c - (sum_x[i] / c) * mean_y;
      denom += wj[i] * a[i];
    }
    if (!std::isfinite(denom) || std::abs(denom) < options.denominator_tolerance) continue;
    for (std::size_t i = 0; i < in; ++i) pattern[j * in + i] = a[i] / denom;
    result.valid[j] = true;
  }
  result.pattern = Tensor::matrix(out, in, std::move(pattern));
  return result;
}

PatternSet estimate_patterns(const PatternBatch& batch, const Network& net, const PatternOptions& options) {
  if (batch.layers.size() != net.depth()) {
    throw DimensionError("pattern batch has " + std::to_string(batch.layers.size()) +
                         " layers, network has " + std::to_string(net.depth()));
  }
  if (batch.size() < 2) {
    throw ArgumentError("estimate_patterns needs a batch of at least 2 examples, got " +
                        std::to_string(batch.size()));
  }
  PatternSet set;
  for (std::size_t k = 0; k < net.depth(); ++k) {
    set.layers.push_back(estimate_layer_pattern(batch.layers[k], net.layer(k), options));
  }
  return set;
}

Network attach_patterns(const Network& net, const PatternSet& patterns) {
  std::vector<Tensor> p;
  p.reserve(patterns.layers.size());
  for (const auto& l : patterns.layers) p.push_back(l.pattern);
  return net.with_patterns(std::move(p));
}

}  // namespace pgig
