#pragma once

#include <cstddef>
#include <iosfwd>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "pgig/tensor.hpp"

namespace pgig {

enum class Activation { Linear, ReLU };
enum class OutputMode { Raw, Softmax };

/// Standard: exact reverse-mode derivative.
/// Guided: at each ReLU, pass only gradient entries that are positive and whose
///   pre-activation is positive.
/// Pattern: weights replaced by w ⊙ p during the backward sweep only.
enum class BackwardMode { Standard, Guided, Pattern };

std::string_view to_string(Activation a);
std::string_view to_string(OutputMode m);
std::string_view to_string(BackwardMode m);

/// Dense layer y = act(W x + b). Weights are (out, in).
struct Layer {
  Tensor weights;
  Tensor bias;
  Activation activation = Activation::Linear;
  std::optional<Tensor> pattern;  ///< same shape as weights when present

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
};

/// Builds a layer, checking bias and pattern shapes against the weights.
Layer make_layer(Tensor weights, Tensor bias, Activation activation,
                 std::optional<Tensor> pattern = std::nullopt);

/// Feedforward stack of dense layers with an optional final softmax.
/// Immutable; the with_* members return modified copies.
class Network {
 public:
  Network(std::vector<Layer> layers, OutputMode output_mode);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t k) const { return layers_.at(k); }
  std::size_t depth() const noexcept { return layers_.size(); }
  OutputMode output_mode() const noexcept { return output_mode_; }
  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t output_dim() const { return layers_.back().out_dim(); }

  /// True when every layer carries a pattern.
  bool has_patterns() const;

  /// One pattern per layer, in layer order.
  Network with_patterns(std::vector<Tensor> patterns) const;
  Network without_patterns() const;
  Network with_output_mode(OutputMode mode) const;

 private:
  std::vector<Layer> layers_;
  OutputMode output_mode_;
};

struct LayerRecord {
  Tensor input;
  Tensor pre_activation;
  Tensor post_activation;
};

/// Everything a backward sweep needs from one forward pass.
struct ForwardTrace {
  std::vector<LayerRecord> layers;
  Tensor output;  ///< softmax of the last post-activation in Softmax mode

  const Tensor& logits() const { return layers.back().post_activation; }
};

ForwardTrace forward(const Network& net, const Tensor& x);

/// Convenience: forward(net, x).output.
Tensor predict(const Network& net, const Tensor& x);

/// Gradient of (seed · output) with respect to the network input under `mode`.
///
/// At a ReLU with pre-activation exactly 0 the Standard and Pattern sweeps use
/// the subgradient 0.5; Guided closes the gate there. The softmax stage, when
/// present, always uses its exact Jacobian. Throws ConfigError naming the first
/// layer without a pattern when mode is Pattern.
Tensor backward(const Network& net, const ForwardTrace& trace, const Tensor& seed,
                BackwardMode mode);

/// The output-side seed every method starts from: one-hot 1.0 at `target` for
/// Standard and Guided, one-hot ŷ_target for Pattern. `target` may be omitted
/// only for scalar outputs.
Tensor output_grad_seed(const Network& net, const ForwardTrace& trace,
                        std::optional<std::size_t> target, BackwardMode mode);

/// Per-layer parameter gradients, shapes matching the layer.
struct ParameterGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

/// Standard-mode parameter gradients for a seed placed on the logits (the last
/// layer's post-activation), bypassing any softmax. Used by the trainer.
ParameterGradients parameter_gradients(const Network& net, const ForwardTrace& trace,
                                       const Tensor& logit_seed);

// Plain-text network format, version 1:
//
//   pgig-network 1 <layer-count> <raw|softmax>
//   layer <in> <out> <linear|relu> <pattern|nopattern>
//   <out lines of weights, in values each>
//   <one line of bias, out values>
//   [<out lines of pattern values>]
//
// Values are written in shortest round-trip decimal form.
void save_network(std::ostream& out, const Network& net);
Network load_network(std::istream& in, std::string_view source_name = "<stream>");
void save_network(const std::filesystem::path& path, const Network& net);
Network load_network(const std::filesystem::path& path);

}  // namespace pgig
