#include <gtest/gtest.h>

#include <cmath>

#include "pgig/attribution.hpp"
#include "pgig/error.hpp"
#include "pgig/stress_lab.hpp"
#include "support/test_support.hpp"

using namespace pgig;
using pgig::testing::linear_net;
using pgig::testing::random_linear_layer;
using pgig::testing::random_network;
using pgig::testing::random_tensor;

namespace {

Network stress_net() { return stress::build_stress_model(); }

Network stress_with_patterns() {
  return stress_net().with_patterns({Tensor::matrix(1, 2, {-1, 0}), Tensor::matrix(1, 1, {-1})});
}

Network with_ones(const Network& net) {
  std::vector<Tensor> ones;
  for (const auto& l : net.layers()) ones.push_back(Tensor::filled(l.weights.shape(), 1.0));
  return net.with_patterns(ones);
}

MethodConfig steps(std::size_t m) {
  MethodConfig c;
  c.steps = m;
  return c;
}

MethodConfig noiseless() {
  MethodConfig c;
  c.noise_sigma = 0.0;
  return c;
}

void expect_near(const Tensor& a, const Tensor& b, double tol) {
  ASSERT_TRUE(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

}  // namespace

TEST(Methods, NamesRoundTrip) {
  EXPECT_EQ(all_methods().size(), 11u);
  for (Method m : all_methods()) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_FALSE(parse_method("nope").has_value());
  EXPECT_TRUE(requires_patterns(Method::Pgig));
  EXPECT_TRUE(requires_patterns(Method::PatternAttribution));
  EXPECT_FALSE(requires_patterns(Method::IntegratedGradients));
  EXPECT_NE(method_names().find("smoothgrad_ig"), std::string::npos);
}

TEST(Methods, ConfigValidation) {
  const auto x = Tensor::vector({1, 0});
  auto c = steps(0);
  EXPECT_THROW(integrated_gradients(stress_net(), x, std::nullopt, c), ArgumentError);
  c = MethodConfig{};
  c.noise_sigma = -1;
  EXPECT_THROW(smoothgrad_squared(stress_net(), x, std::nullopt, c), ArgumentError);
  c = MethodConfig{};
  c.baseline = Tensor::vector({1, 2, 3});
  EXPECT_THROW(integrated_gradients(stress_net(), x, std::nullopt, c), DimensionError);
  EXPECT_THROW(vanilla_gradient(stress_net(), Tensor::vector({1}), std::nullopt, {}), DimensionError);
  EXPECT_THROW(expected_gradients(stress_net(), x, std::nullopt, {}), ConfigError);
  EXPECT_THROW(pgig::pgig(stress_net(), x, std::nullopt, {}), ConfigError);
  EXPECT_THROW(pattern_attribution(stress_net(), x, std::nullopt, {}), ConfigError);
}

TEST(VanillaGradient, Examples) {
  EXPECT_EQ(vanilla_gradient(stress_net(), Tensor::vector({0, 0}), std::nullopt, {}).values, Tensor::vector({1, -1}));
  EXPECT_EQ(vanilla_gradient(stress_net(), Tensor::vector({2, 0}), std::nullopt, {}).values, Tensor::vector({0, 0}));
  const auto lin = linear_net({2, -1, 0.5}, 0.3);
  RandomSource rng(1);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(vanilla_gradient(lin, random_tensor(rng, {3}, -5, 5), std::nullopt, {}).values,
              Tensor::vector({2, -1, 0.5}));
  }
}

TEST(GradientTimesInput, Examples) {
  const auto lin = linear_net({2, -1});
  EXPECT_EQ(gradient_times_input(lin, Tensor::vector({3, 3}), std::nullopt, {}).values, Tensor::vector({6, -3}));
  RandomSource rng(2);
  const auto net = random_network(rng, 3, 6, 1);
  EXPECT_EQ(gradient_times_input(net, Tensor::zeros({net.input_dim()}), std::nullopt, {}).values,
            Tensor::zeros({net.input_dim()}));
}

TEST(IntegratedGradients, LinearIsExactForAnyBaseline) {
  RandomSource rng(3);
  const auto lin = linear_net({1.5, -0.25, 3});
  for (std::size_t m : {1u, 7u, 25u}) {
    auto c = steps(m);
    c.baseline = random_tensor(rng, {3});
    const auto x = random_tensor(rng, {3});
    const auto expected = hadamard(Tensor::vector({1.5, -0.25, 3}), x - *c.baseline);
    expect_near(integrated_gradients(lin, x, std::nullopt, c).values, expected, 1e-14);
  }
}

TEST(IntegratedGradients, StressCompleteness) {
  const auto x = Tensor::vector({2, 0});
  const auto map = integrated_gradients(stress_net(), x, std::nullopt, steps(1000));
  EXPECT_NEAR(sum(map.values), 1.0, 2e-3);
  EXPECT_GT(map.values[0], 0.9);
  EXPECT_EQ(map.values[1], 0.0);
}

// Along x = (2, 0) the ReLU closes at α = 1/2; the path sum over k = 1..m
// misses exactly one step's worth of mass, so the gap is 1/m.
TEST(IntegratedGradients, StressGapIsOneOverM) {
  const auto x = Tensor::vector({2, 0});
  const auto gap = [&](std::size_t m) {
    return std::abs(sum(integrated_gradients(stress_net(), x, std::nullopt, steps(m)).values) - 1.0);
  };
  for (std::size_t m : {50u, 51u, 1000u, 2000u}) EXPECT_NEAR(gap(m), 1.0 / static_cast<double>(m), 1e-12) << m;
  EXPECT_LT(gap(2000), gap(50));
}

TEST(IntegratedGradients, ZeroPath) {
  auto c = MethodConfig{};
  c.baseline = Tensor::vector({0.3, -0.7});
  EXPECT_EQ(integrated_gradients(stress_net(), *c.baseline, std::nullopt, c).values, Tensor::zeros({2}));
}

TEST(IntegratedGradients, CompletenessImprovesWithSteps) {
  RandomSource rng(4);
  int compared = 0;
  for (int n = 0; n < 40; ++n) {
    const auto net = random_network(rng, 3, 6, 1);
    const auto x = random_tensor(rng, {net.input_dim()}, -2, 2);
    const double target = predict(net, x)[0] - predict(net, Tensor::zeros({net.input_dim()}))[0];
    const double g50 = std::abs(sum(integrated_gradients(net, x, std::nullopt, steps(50)).values) - target);
    const double g2000 = std::abs(sum(integrated_gradients(net, x, std::nullopt, steps(2000)).values) - target);
    if (g50 < 1e-12) continue;
    EXPECT_LT(g2000, g50);
    ++compared;
  }
  EXPECT_GT(compared, 10);
}

TEST(SmoothGradSquared, Examples) {
  const auto x = Tensor::vector({0.3, -0.2});
  const auto v = vanilla_gradient(stress_net(), x, std::nullopt, {}).values;
  EXPECT_EQ(smoothgrad_squared(stress_net(), x, std::nullopt, noiseless()).values, hadamard(v, v));
  const auto lin = linear_net({2, -3});
  expect_near(smoothgrad_squared(lin, x, std::nullopt, {}).values, Tensor::vector({4, 9}), 1e-12);
  RandomSource rng(5);
  const auto net = random_network(rng, 3, 6, 1);
  const auto sg = smoothgrad_squared(net, random_tensor(rng, {net.input_dim()}), std::nullopt, {});
  for (double val : sg.values.values()) {
    EXPECT_GE(val, 0.0);
  }
}

TEST(VarGrad, Examples) {
  const auto x = Tensor::vector({0.3, -0.2});
  EXPECT_EQ(vargrad(linear_net({2, -3}), x, std::nullopt, {}).values, Tensor::zeros({2}));
  EXPECT_EQ(vargrad(stress_net(), x, std::nullopt, noiseless()).values, Tensor::zeros({2}));
}

// Feature-1 gradient is the indicator of x₁' − x₂' < 1; at z = 1 that is a fair
// coin, so the sampled population variance approaches 1/4.
TEST(VarGrad, KinkVarianceMatchesBernoulliOracle) {
  MethodConfig c;
  c.noise_sigma = 0.15;
  c.samples = 10000;
  c.random_seed = 17;
  const auto map = vargrad(stress_net(), Tensor::vector({1, 0}), std::nullopt, c);
  EXPECT_GT(map.values[0], 0.0);
  EXPECT_NEAR(map.values[0], 0.25, 0.01);
  // Brute force oracle using the same noise model.
  RandomSource rng(99);
  double s = 0, s2 = 0;
  for (int i = 0; i < 10000; ++i) {
    const double d = 1.0 + rng.normal(0, 0.15) - rng.normal(0, 0.15);
    const double g = d < 1.0 ? 1.0 : 0.0;
    s += g;
    s2 += g * g;
  }
  const double var = s2 / 1e4 - (s / 1e4) * (s / 1e4);
  EXPECT_NEAR(map.values[0], var, 0.01);
}

TEST(SmoothGradIG, Examples) {
  RandomSource rng(6);
  const auto net = random_network(rng, 3, 6, 1);
  const auto x = random_tensor(rng, {net.input_dim()});
  EXPECT_EQ(smoothgrad_ig(net, x, std::nullopt, noiseless()).values,
            integrated_gradients(net, x, std::nullopt, noiseless()).values);

  const auto lin = linear_net({2, -1, 0.5});
  const auto xl = Tensor::vector({1, 2, -1});
  expect_near(smoothgrad_ig(lin, xl, std::nullopt, {}).values, Tensor::vector({2, -2, -0.5}), 1e-12);

  MethodConfig c;
  c.baseline = x;
  EXPECT_EQ(smoothgrad_ig(net, x, std::nullopt, c).values, Tensor::zeros({net.input_dim()}));
}

TEST(SmoothGradIG, NoiseIsRedrawnPerPathPoint) {
  MethodConfig a;
  a.steps = 5;
  a.samples = 3;
  a.random_seed = 1;
  auto b = a;
  b.random_seed = 2;
  const auto x = Tensor::vector({1.2, 0.1});
  EXPECT_NE(smoothgrad_ig(stress_net(), x, std::nullopt, a).values, smoothgrad_ig(stress_net(), x, std::nullopt, b).values);
  EXPECT_EQ(smoothgrad_ig(stress_net(), x, std::nullopt, a).values, smoothgrad_ig(stress_net(), x, std::nullopt, a).values);
}

TEST(ExpectedGradients, Examples) {
  const auto x = Tensor::vector({0.4, -0.1});
  const std::vector<Tensor> self{x};
  MethodConfig c;
  c.reference = self;
  EXPECT_EQ(expected_gradients(stress_net(), x, std::nullopt, c).values, Tensor::zeros({2}));

  const auto lin = linear_net({2, -1});
  const std::vector<Tensor> single{Tensor::vector({1, 1})};
  c.reference = single;
  expect_near(expected_gradients(lin, x, std::nullopt, c).values, Tensor::vector({2 * (0.4 - 1), -1 * (-0.1 - 1)}), 1e-12);
}

TEST(ExpectedGradients, LinearMonteCarlo) {
  RandomSource rng(7);
  std::vector<Tensor> ref;
  for (int i = 0; i < 500; ++i) ref.push_back(random_tensor(rng, {2}, -1, 3));
  double m0 = 0, m1 = 0;
  for (const auto& r : ref) {
    m0 += r[0] / 500.0;
    m1 += r[1] / 500.0;
  }
  MethodConfig c;
  c.reference = ref;
  c.baseline_draws = 10000;
  const auto x = Tensor::vector({0.5, 0.5});
  const auto map = expected_gradients(linear_net({2, -1}), x, std::nullopt, c);
  // Uniform width 4 has sd 4/√12; three standard errors of the mean at 10⁴ draws.
  const double se = 4.0 / std::sqrt(12.0) / 100.0;
  EXPECT_NEAR(map.values[0], 2 * (0.5 - m0), 3 * 2 * se);
  EXPECT_NEAR(map.values[1], -1 * (0.5 - m1), 3 * se);
}

TEST(GuidedBackprop, Examples) {
  const auto lin = linear_net({2, -1});
  const auto x = Tensor::vector({0.2, 0.3});
  EXPECT_EQ(guided_backprop(lin, x, std::nullopt, {}).values, vanilla_gradient(lin, x, std::nullopt, {}).values);

  const auto g = guided_backprop(stress_net(), Tensor::vector({0, 0}), std::nullopt, {}).values;
  EXPECT_GE(g[1], -1.0);
  // The only path runs through a negative upstream gradient (−1), so it is closed.
  EXPECT_EQ(g, Tensor::zeros({2}));

  RandomSource rng(8);
  const Network pos({make_layer(random_tensor(rng, {4, 3}, 0, 1), random_tensor(rng, {4}, 0, 1), Activation::ReLU),
                     make_layer(random_tensor(rng, {1, 4}, 0, 1), Tensor::zeros({1}), Activation::Linear)},
                    OutputMode::Raw);
  const auto xp = random_tensor(rng, {3}, 0, 1);
  EXPECT_EQ(guided_backprop(pos, xp, std::nullopt, {}).values, vanilla_gradient(pos, xp, std::nullopt, {}).values);
}

TEST(PatternAttribution, Examples) {
  const auto net = stress_with_patterns();
  for (double z = 1.06; z <= 2.0; z += 0.1) {
    EXPECT_EQ(pattern_attribution(net, Tensor::vector({z, 0}), std::nullopt, {}).values, Tensor::zeros({2}));
  }
  EXPECT_EQ(pattern_attribution(net, Tensor::vector({0.5, 0}), std::nullopt, {}).values[1], 0.0);

  RandomSource rng(9);
  const auto plain = random_network(rng, 3, 6, 1);
  const auto x = random_tensor(rng, {plain.input_dim()});
  const double y = predict(plain, x)[0];
  expect_near(pattern_attribution(with_ones(plain), x, std::nullopt, {}).values,
              scale(vanilla_gradient(plain, x, std::nullopt, {}).values, y), 1e-12);
}

TEST(Pgig, Examples) {
  const auto net = stress_with_patterns();
  const auto map = pgig::pgig(net, Tensor::vector({2, 0}), std::nullopt, steps(1000));
  EXPECT_GT(std::abs(map.values[0]), 0.0);
  EXPECT_EQ(map.values[1], 0.0);

  RandomSource rng(10);
  const auto plain = random_network(rng, 3, 6, 1);
  const auto x = random_tensor(rng, {plain.input_dim()});
  EXPECT_EQ(pgig::pgig(with_ones(plain), x, std::nullopt, {}).values, integrated_gradients(plain, x, std::nullopt, {}).values);
}

TEST(Pgig, LinearReducesToPatternTimesIG) {
  RandomSource rng(11);
  for (int n = 0; n < 20; ++n) {
    const auto net = random_linear_layer(rng, 1 + rng.below(8), 1, true);
    const auto x = random_tensor(rng, {net.input_dim()}, -2, 2);
    for (std::size_t m : {1u, 5u, 25u}) {
      const auto ig = integrated_gradients(net, x, std::nullopt, steps(m)).values;
      const auto p = *net.layer(0).pattern;
      const auto expected = hadamard(Tensor::vector(std::vector<double>(p.values().begin(), p.values().end())), ig);
      expect_near(pgig::pgig(net, x, std::nullopt, steps(m)).values, expected, 1e-12);
    }
  }
}

TEST(Pgig, OutputSeedSwitchScalesByPrediction) {
  const auto net = stress_with_patterns();
  MethodConfig unit = steps(1);
  MethodConfig out = steps(1);
  out.pgig_seed = PathSeed::Output;
  const auto x = Tensor::vector({0.5, 0.1});
  const double y = predict(net, x)[0];
  expect_near(pgig::pgig(net, x, std::nullopt, out).values, scale(pgig::pgig(net, x, std::nullopt, unit).values, y), 1e-12);
}

TEST(Pgig, PlateauSensitivityAndDistractorNullity) {
  const auto net = stress_with_patterns();
  RandomSource rng(12);
  for (int i = 0; i < 200; ++i) {
    const double z = -2.0 + 4.0 * rng.uniform();
    const double eps = rng.normal(0, 0.5);
    const auto x = Tensor::vector({z + eps, eps});
    const auto map = pgig::pgig(net, x, std::nullopt, {});
    EXPECT_EQ(map.values[1], 0.0);
    if (z - 0.0 > 1.05) {
      EXPECT_GT(std::abs(pgig::pgig(net, Tensor::vector({z, 0}), std::nullopt, {}).values[0]), 0.0);
      EXPECT_EQ(pattern_attribution(net, Tensor::vector({z, 0}), std::nullopt, {}).values[0], 0.0);
    }
  }
}

TEST(RandomBaseline, Contract) {
  MethodConfig a, b;
  a.random_seed = 1;
  b.random_seed = 2;
  const auto x = Tensor::zeros({2});
  const auto m1 = random_baseline(stress_net(), x, std::nullopt, a).values;
  EXPECT_EQ(m1, random_baseline(stress_net(), x, std::nullopt, a).values);
  EXPECT_NE(m1, random_baseline(stress_net(), x, std::nullopt, b).values);
  MethodConfig big;
  const auto wide = random_baseline(linear_net(std::vector<double>(500, 1.0)), Tensor::zeros({500}), std::nullopt, big);
  for (double v : wide.values.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Attribute, DispatchesAndRecordsMetadata) {
  RandomSource rng(13);
  const auto net = with_ones(random_network(rng, 3, 6, 3, OutputMode::Softmax));
  const auto x = random_tensor(rng, {net.input_dim()});
  const std::vector<Tensor> ref{random_tensor(rng, {net.input_dim()}), random_tensor(rng, {net.input_dim()})};
  MethodConfig c;
  c.reference = ref;
  c.steps = 4;
  c.samples = 3;
  c.baseline_draws = 5;
  for (Method m : all_methods()) {
    const auto map = attribute(m, net, x, 1, c);
    EXPECT_EQ(map.method, m);
    EXPECT_EQ(map.target, 1u);
    EXPECT_EQ(map.values.size(), x.size());
  }
  EXPECT_THROW(attribute(Method::VanillaGradient, net, x, std::nullopt, c), ArgumentError);
}

TEST(Attribute, ExplainLogitsBypassesSoftmax) {
  RandomSource rng(14);
  const auto soft = random_network(rng, 2, 5, 3, OutputMode::Softmax);
  const auto raw = soft.with_output_mode(OutputMode::Raw);
  const auto x = random_tensor(rng, {soft.input_dim()});
  MethodConfig c;
  c.explain_logits = true;
  EXPECT_EQ(vanilla_gradient(soft, x, 2, c).values, vanilla_gradient(raw, x, 2, {}).values);
  EXPECT_NE(vanilla_gradient(soft, x, 2, {}).values, vanilla_gradient(raw, x, 2, {}).values);
}
