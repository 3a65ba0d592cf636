#include "pgig/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pgig/error.hpp"

namespace pgig {

namespace {

constexpr double kKinkSubgradient = 0.5;

std::vector<double> affine(const Layer& layer, std::span<const double> x) {
  const std::size_t in = layer.in_dim();
  const auto w = layer.weights.values();
  std::vector<double> pre(layer.out_dim());
  for (std::size_t j = 0; j < pre.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < in; ++i) acc += w[j * in + i] * x[i];
    pre[j] = acc + layer.bias[j];
  }
  return pre;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

void require_patterns(const Network& net) {
  for (std::size_t k = 0; k < net.depth(); ++k) {
    if (!net.layer(k).pattern) {
      throw ConfigError("pattern backward: layer " + std::to_string(k) + " (" +
                        std::string(to_string(net.layer(k).activation)) + ", " +
                        std::to_string(net.layer(k).out_dim()) + "x" +
                        std::to_string(net.layer(k).in_dim()) + ") has no pattern");
    }
  }
}

void check_trace(const Network& net, const ForwardTrace& trace) {
  if (trace.layers.size() != net.depth()) {
    throw DimensionError("trace has " + std::to_string(trace.layers.size()) +
                         " layers, network has " + std::to_string(net.depth()));
  }
}

// Gradient of the seeded output with respect to the logits.
std::vector<double> seed_to_logits(const Network& net, const ForwardTrace& trace,
                                   const Tensor& seed) {
  if (seed.rank() != 1 || seed.size() != net.output_dim()) {
    throw DimensionError("seed shape " + shape_string(seed.shape()) + " does not match output (" +
                         std::to_string(net.output_dim()) + ")");
  }
  std::vector<double> g(seed.values().begin(), seed.values().end());
  if (net.output_mode() == OutputMode::Softmax) {
    const auto s = trace.output.values();
    double weighted = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) weighted += s[i] * g[i];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = s[i] * (g[i] - weighted);
  }
  return g;
}

// Reverse sweep from a logit gradient down to the input. Parameter gradients
// are accumulated into `params` when given (Standard mode only).
std::vector<double> sweep(const Network& net, const ForwardTrace& trace, std::vector<double> g,
                          BackwardMode mode, ParameterGradients* params) {
  for (std::size_t k = net.depth(); k-- > 0;) {
    const Layer& layer = net.layer(k);
    const LayerRecord& rec = trace.layers[k];

    if (layer.activation == Activation::ReLU) {
      const auto pre = rec.pre_activation.values();
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (mode == BackwardMode::Guided) {
          if (pre[j] <= 0.0 || g[j] < 0.0) g[j] = 0.0;
        } else if (pre[j] < 0.0) {
          g[j] = 0.0;
        } else if (pre[j] == 0.0) {
          g[j] *= kKinkSubgradient;
        }
      }
    }

    const std::size_t in = layer.in_dim();
    const auto w = layer.weights.values();

    if (params) {
      const auto x = rec.input.values();
      auto& dw = params->weights[k];
      auto& db = params->bias[k];
      for (std::size_t j = 0; j < g.size(); ++j) {
        for (std::size_t i = 0; i < in; ++i) dw[j * in + i] += g[j] * x[i];
        db[j] += g[j];
      }
    }

    std::vector<double> next(in, 0.0);
    if (mode == BackwardMode::Pattern) {
      const auto p = layer.pattern->values();
      for (std::size_t j = 0; j < g.size(); ++j) {
        for (std::size_t i = 0; i < in; ++i) next[i] += g[j] * (w[j * in + i] * p[j * in + i]);
      }
    } else {
      for (std::size_t j = 0; j < g.size(); ++j) {
        for (std::size_t i = 0; i < in; ++i) next[i] += g[j] * w[j * in + i];
      }
    }
    g = std::move(next);
  }
  return g;
}

}  // namespace

std::string_view to_string(Activation a) { return a == Activation::ReLU ? "relu" : "linear"; }

std::string_view to_string(OutputMode m) { return m == OutputMode::Softmax ? "softmax" : "raw"; }

std::string_view to_string(BackwardMode m) {
  switch (m) {
    case BackwardMode::Standard: return "standard";
    case BackwardMode::Guided: return "guided";
    case BackwardMode::Pattern: return "pattern";
  }
  return "unknown";
}

Layer make_layer(Tensor weights, Tensor bias, Activation activation, std::optional<Tensor> pattern) {
  if (weights.rank() != 2) {
    throw DimensionError("layer weights must be rank 2, got " + shape_string(weights.shape()));
  }
  if (bias.rank() != 1 || bias.size() != weights.rows()) {
    throw DimensionError("layer bias " + shape_string(bias.shape()) + " does not match weights " +
                         shape_string(weights.shape()));
  }
  if (pattern && !pattern->same_shape(weights)) {
    throw DimensionError("layer pattern " + shape_string(pattern->shape()) +
                         " does not match weights " + shape_string(weights.shape()));
  }
  return Layer{std::move(weights), std::move(bias), activation, std::move(pattern)};
}

Network::Network(std::vector<Layer> layers, OutputMode output_mode)
    : layers_(std::move(layers)), output_mode_(output_mode) {
  if (layers_.empty()) throw ArgumentError("network needs at least one layer");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    if (l.weights.rank() != 2 || l.bias.rank() != 1 || l.bias.size() != l.out_dim() ||
        (l.pattern && !l.pattern->same_shape(l.weights))) {
      throw DimensionError("layer " + std::to_string(k) + " has inconsistent shapes");
    }
    if (k > 0 && layers_[k - 1].out_dim() != l.in_dim()) {
      throw DimensionError("layer " + std::to_string(k) + " expects " + std::to_string(l.in_dim()) +
                           " inputs but layer " + std::to_string(k - 1) + " produces " +
                           std::to_string(layers_[k - 1].out_dim()));
    }
  }
  if (output_mode_ == OutputMode::Softmax && output_dim() < 2) {
    throw ArgumentError("softmax output needs at least 2 outputs");
  }
}

bool Network::has_patterns() const {
  return std::all_of(layers_.begin(), layers_.end(), [](const Layer& l) { return l.pattern.has_value(); });
}

Network Network::with_patterns(std::vector<Tensor> patterns) const {
  if (patterns.size() != layers_.size()) {
    throw DimensionError("got " + std::to_string(patterns.size()) + " patterns for " +
                         std::to_string(layers_.size()) + " layers");
  }
  std::vector<Layer> layers = layers_;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k] = make_layer(layers[k].weights, layers[k].bias, layers[k].activation,
                           std::move(patterns[k]));
  }
  return Network(std::move(layers), output_mode_);
}

Network Network::without_patterns() const {
  std::vector<Layer> layers = layers_;
  for (Layer& l : layers) l.pattern.reset();
  return Network(std::move(layers), output_mode_);
}

Network Network::with_output_mode(OutputMode mode) const { return Network(layers_, mode); }

ForwardTrace forward(const Network& net, const Tensor& x) {
  if (x.rank() != 1 || x.size() != net.input_dim()) {
    throw DimensionError("forward: input " + shape_string(x.shape()) + " does not match network input (" +
                         std::to_string(net.input_dim()) + ")");
  }
  ForwardTrace trace;
  trace.layers.reserve(net.depth());
  Tensor current = x;
  for (const Layer& layer : net.layers()) {
    std::vector<double> pre = affine(layer, current.values());
    std::vector<double> post = pre;
    if (layer.activation == Activation::ReLU) {
      for (double& v : post) v = v > 0.0 ? v : 0.0;
    }
    Tensor post_t = Tensor::vector(std::move(post));
    trace.layers.push_back({std::move(current), Tensor::vector(std::move(pre)), post_t});
    current = std::move(post_t);
  }
  if (net.output_mode() == OutputMode::Softmax) {
    trace.output = Tensor::vector(softmax(current.values()));
  } else {
    trace.output = std::move(current);
  }
  return trace;
}

Tensor predict(const Network& net, const Tensor& x) { return forward(net, x).output; }

Tensor backward(const Network& net, const ForwardTrace& trace, const Tensor& seed, BackwardMode mode) {
  check_trace(net, trace);
  if (mode == BackwardMode::Pattern) require_patterns(net);
  std::vector<double> g = seed_to_logits(net, trace, seed);
  std::vector<double> grad = sweep(net, trace, std::move(g), mode, nullptr);
  require_finite(grad, std::string("backward (") + std::string(to_string(mode)) + ")");
  return Tensor::vector(std::move(grad));
}

Tensor output_grad_seed(const Network& net, const ForwardTrace& trace,
                        std::optional<std::size_t> target, BackwardMode mode) {
  const std::size_t n = net.output_dim();
  if (!target) {
    if (n > 1) throw ArgumentError("a target class is required for a network with " + std::to_string(n) + " outputs");
    target = 0;
  }
  if (*target >= n) {
    throw ArgumentError("target class " + std::to_string(*target) + " out of range for " +
                        std::to_string(n) + " outputs");
  }
  std::vector<double> seed(n, 0.0);
  seed[*target] = mode == BackwardMode::Pattern ? trace.output[*target] : 1.0;
  return Tensor::vector(std::move(seed));
}

ParameterGradients parameter_gradients(const Network& net, const ForwardTrace& trace,
                                       const Tensor& logit_seed) {
  check_trace(net, trace);
  if (logit_seed.rank() != 1 || logit_seed.size() != net.output_dim()) {
    throw DimensionError("logit seed " + shape_string(logit_seed.shape()) + " does not match output (" +
                         std::to_string(net.output_dim()) + ")");
  }
  ParameterGradients params;
  for (const Layer& l : net.layers()) {
    params.weights.emplace_back(l.weights.size(), 0.0);
    params.bias.emplace_back(l.bias.size(), 0.0);
  }
  std::vector<double> g(logit_seed.values().begin(), logit_seed.values().end());
  sweep(net, trace, std::move(g), BackwardMode::Standard, &params);
  return params;
}

}  // namespace pgig
