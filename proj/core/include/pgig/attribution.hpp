#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pgig/network.hpp"
#include "pgig/tensor.hpp"

namespace pgig {

enum class Method {
  VanillaGradient,
  GradientTimesInput,
  IntegratedGradients,
  SmoothGradSquared,
  VarGrad,
  SmoothGradIG,
  ExpectedGradients,
  GuidedBackprop,
  PatternAttribution,
  Pgig,
  RandomBaseline,
};

/// All eleven methods in a fixed order (the order of benchmark CSV columns).
std::span<const Method> all_methods();
std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);
/// Comma-separated list of every valid method name.
std::string method_names();
bool requires_patterns(Method m);

/// Seed used at each PGIG path point.
enum class PathSeed {
  Unit,    ///< one-hot 1.0, keeping the path sum a plain sum of pattern gradients
  Output,  ///< one-hot ŷ at the path point, as PatternAttribution does
};

struct MethodConfig {
  std::optional<Tensor> baseline;  ///< nullopt means the all-zero input
  std::size_t steps = 25;          ///< path points m
  std::size_t samples = 25;        ///< noise samples n
  double noise_mu = 0.0;
  double noise_sigma = std::sqrt(0.15);  ///< standard deviation; the default variance is 0.15
  std::size_t baseline_draws = 49;
  std::uint64_t random_seed = 0;
  /// Data the expected-gradients baselines are drawn from. Not owned.
  std::span<const Tensor> reference;
  /// Explain the logits instead of the softmax output of a Softmax network.
  bool explain_logits = false;
  PathSeed pgig_seed = PathSeed::Unit;

  void validate(const Tensor& x) const;
};

struct AttributionMap {
  Tensor values;
  Method method = Method::VanillaGradient;
  std::optional<std::size_t> target;
  std::vector<std::pair<std::string, std::string>> metadata;
};

using Target = std::optional<std::size_t>;

AttributionMap vanilla_gradient(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);
AttributionMap gradient_times_input(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);
AttributionMap integrated_gradients(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);
AttributionMap smoothgrad_squared(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);
AttributionMap vargrad(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);
AttributionMap smoothgrad_ig(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);
AttributionMap expected_gradients(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);
AttributionMap guided_backprop(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);
AttributionMap pattern_attribution(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);
AttributionMap pgig(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);
AttributionMap random_baseline(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg);

/// Dispatches to the method above.
AttributionMap attribute(Method method, const Network& net, const Tensor& x, Target target,
                         const MethodConfig& cfg);

}  // namespace pgig
