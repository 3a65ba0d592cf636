#include <gtest/gtest.h>

#include <cmath>

#include "pgig/error.hpp"
#include "pgig/patterns.hpp"
#include "pgig/stress_lab.hpp"
#include "support/test_support.hpp"

using namespace pgig;
using pgig::testing::random_network;
using pgig::testing::random_tensor;

namespace {

double row_dot(const Tensor& w, const Tensor& p, std::size_t j) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.cols(); ++i) s += w.at(j, i) * p.at(j, i);
  return s;
}

std::vector<Tensor> stress_inputs(std::size_t n, double sigma, std::uint64_t seed) {
  RandomSource rng(seed);
  std::vector<Tensor> xs;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    const double eps = rng.normal(0.0, sigma);
    xs.push_back(Tensor::vector({z + eps, eps}));
  }
  return xs;
}

// One linear neuron w = (1, −1) reading x = (1, 0)·z + (1, 1)·ε, which cancels
// ε exactly. The true pattern is (1, 0); p = (1, 0) + (c/v)(1, 1) with c the
// sample covariance of ε and z, so the second coordinate is the leaked distractor.
double distractor_component(std::size_t n, RandomSource& rng) {
  const Network net({make_layer(Tensor::matrix(1, 2, {1, -1}), Tensor::vector({0}), Activation::Linear)},
                    OutputMode::Raw);
  std::vector<Tensor> xs;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.standard_normal();
    const double eps = rng.standard_normal();
    xs.push_back(Tensor::vector({z + eps, eps}));
  }
  const auto set = estimate_patterns(collect_batch(net, xs), net);
  return set.layers[0].pattern.at(0, 1);
}

}  // namespace

TEST(Patterns, CollectRecordsIdentityInputsVerbatim) {
  const Network id({make_layer(Tensor::identity(2), Tensor::zeros({2}), Activation::Linear)}, OutputMode::Raw);
  const std::vector<Tensor> data{Tensor::vector({1, 2}), Tensor::vector({3, 4})};
  const auto batch = collect_batch(id, data);
  ASSERT_EQ(batch.size(), 2u);
  EXPECT_EQ(batch.layers[0].inputs[0], data[0]);
  EXPECT_EQ(batch.layers[0].inputs[1], data[1]);
  EXPECT_EQ(batch.layers[0].outputs[1], data[1]);
  EXPECT_THROW(collect_batch(id, std::vector<Tensor>{}), ArgumentError);
}

TEST(Patterns, StressLayerTwoInputsAreReluOfLayerOne) {
  const auto net = stress::build_stress_model();
  const auto batch = collect_batch(net, stress_inputs(401, 0.25, 1));
  for (std::size_t e = 0; e < batch.size(); ++e) {
    EXPECT_EQ(batch.layers[1].inputs[e][0], std::max(0.0, batch.layers[0].outputs[e][0]));
  }
}

TEST(Patterns, SingleExampleRejectedByEstimate) {
  const auto net = stress::build_stress_model();
  const std::vector<Tensor> one{Tensor::vector({0.1, 0})};
  const auto batch = collect_batch(net, one);
  EXPECT_THROW(estimate_patterns(batch, net), ArgumentError);
}

TEST(Patterns, StressPatternsAt401Points) {
  const auto net = stress::build_stress_model();
  const auto set = estimate_patterns(collect_batch(net, stress_inputs(401, 0.25, 2)), net);
  const auto& p1 = set.layers[0].pattern;
  EXPECT_NEAR(p1.at(0, 0), -1.0, 0.05);
  EXPECT_LT(std::abs(p1.at(0, 1)), 0.05);
  EXPECT_NEAR(set.layers[1].pattern.at(0, 0), -1.0, 1e-6);
  EXPECT_EQ(set.invalid_count(), 0u);
}

TEST(Patterns, NoiselessLinearNeuronRecoversSignalDirection) {
  const Network net({make_layer(Tensor::matrix(1, 3, {0.5, -2, 1}), Tensor::vector({0.3}), Activation::Linear)},
                    OutputMode::Raw);
  const double a[3] = {2.0, 1.0, -1.0};
  std::vector<Tensor> xs;
  for (int i = 0; i < 50; ++i) {
    const double z = -1.0 + 0.04 * i;
    xs.push_back(Tensor::vector({a[0] * z, a[1] * z, a[2] * z}));
  }
  const auto set = estimate_patterns(collect_batch(net, xs), net);
  const auto& p = set.layers[0].pattern;
  const double k = p.at(0, 0) / a[0];
  EXPECT_NEAR(p.at(0, 1), k * a[1], 1e-12);
  EXPECT_NEAR(p.at(0, 2), k * a[2], 1e-12);
  EXPECT_NEAR(row_dot(net.layer(0).weights, p, 0), 1.0, 1e-12);
}

TEST(Patterns, ConstantOutputIsInvalid) {
  // The second input is constant and the first has zero weight, so ŷ never varies.
  const Network net({make_layer(Tensor::matrix(1, 2, {0, 1}), Tensor::vector({0}), Activation::ReLU)},
                    OutputMode::Raw);
  std::vector<Tensor> xs;
  for (int i = 0; i < 10; ++i) xs.push_back(Tensor::vector({0.1 * i, 1.0}));
  const auto set = estimate_patterns(collect_batch(net, xs), net);
  EXPECT_FALSE(set.layers[0].valid[0]);
  EXPECT_EQ(set.layers[0].pattern, Tensor::zeros({1, 2}));
  EXPECT_EQ(set.invalid_count(), 1u);
}

TEST(Patterns, DeadNeuronIsInvalid) {
  const Network net({make_layer(Tensor::matrix(1, 2, {1, 1}), Tensor::vector({-100}), Activation::ReLU)},
                    OutputMode::Raw);
  RandomSource rng(3);
  std::vector<Tensor> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(random_tensor(rng, {2}));
  const auto set = estimate_patterns(collect_batch(net, xs), net);
  EXPECT_FALSE(set.layers[0].valid[0]);
  EXPECT_EQ(set.layers[0].regime_count[0], 0u);
}

TEST(Patterns, NormalizationHoldsForEveryValidNeuron) {
  RandomSource rng(4);
  for (int n = 0; n < 20; ++n) {
    const auto net = random_network(rng, 3, 8, 3);
    std::vector<Tensor> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(random_tensor(rng, {net.input_dim()}, -2, 2));
    for (auto scope : {OutputMeanScope::PositiveRegime, OutputMeanScope::FullBatch}) {
      PatternOptions opts;
      opts.output_mean = scope;
      const auto set = estimate_patterns(collect_batch(net, xs), net, opts);
      for (std::size_t k = 0; k < net.depth(); ++k) {
        for (std::size_t j = 0; j < set.layers[k].valid.size(); ++j) {
          if (!set.layers[k].valid[j]) continue;
          EXPECT_NEAR(row_dot(net.layer(k).weights, set.layers[k].pattern, j), 1.0, 1e-9);
        }
      }
    }
  }
}

TEST(Patterns, ScaleInvariance) {
  RandomSource rng(5);
  const auto net = random_network(rng, 1, 6, 4);
  std::vector<Tensor> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(random_tensor(rng, {net.input_dim()}, -2, 2));
  auto batch = collect_batch(net, xs);
  const auto base = estimate_layer_pattern(batch.layers[0], net.layer(0));
  for (double c : {0.01, 3.0, 250.0}) {
    LayerSamples scaled = batch.layers[0];
    for (auto& y : scaled.outputs) y = scale(y, c);
    const auto p = estimate_layer_pattern(scaled, net.layer(0));
    for (std::size_t i = 0; i < p.pattern.size(); ++i) EXPECT_NEAR(p.pattern[i], base.pattern[i], 1e-9);
  }
}

TEST(Patterns, OutputMeanSwitchChangesEstimate) {
  const auto net = stress::build_stress_model();
  const auto batch = collect_batch(net, stress_inputs(401, 0.25, 6));
  PatternOptions full;
  full.output_mean = OutputMeanScope::FullBatch;
  const auto a = estimate_patterns(batch, net);
  const auto b = estimate_patterns(batch, net, full);
  EXPECT_NE(a.layers[0].pattern, b.layers[0].pattern);
  // Layer 2 is linear and ungated, so both scopes see the same examples.
  EXPECT_EQ(a.layers[1].pattern, b.layers[1].pattern);
}

TEST(Patterns, GateLinearLayersSwitch) {
  const auto net = stress::build_stress_model();
  const auto batch = collect_batch(net, stress_inputs(401, 0.25, 7));
  PatternOptions gated;
  gated.gate_linear_layers = true;
  const auto set = estimate_patterns(batch, net, gated);
  EXPECT_LT(set.layers[1].regime_count[0], 401u);
  EXPECT_EQ(estimate_patterns(batch, net).layers[1].regime_count[0], 401u);
}

// Sample cross-covariance between signal and distractor decays like 1/√N, so
// quadrupling the batch halves the distractor component on average.
TEST(Patterns, DistractorComponentHalvesWhenBatchQuadruples) {
  RandomSource rng(8);
  const int trials = 400;
  double small = 0.0, large = 0.0;
  for (int t = 0; t < trials; ++t) small += std::abs(distractor_component(100, rng));
  for (int t = 0; t < trials; ++t) large += std::abs(distractor_component(400, rng));
  const double ratio = large / small;
  EXPECT_GT(ratio, 0.4);
  EXPECT_LT(ratio, 0.6);
}

TEST(Patterns, AttachPatterns) {
  const auto net = stress::build_stress_model();
  const auto set = estimate_patterns(collect_batch(net, stress_inputs(101, 0.1, 9)), net);
  const auto with = attach_patterns(net, set);
  EXPECT_TRUE(with.has_patterns());
  EXPECT_EQ(*with.layer(0).pattern, set.layers[0].pattern);
  EXPECT_FALSE(net.has_patterns());
}
