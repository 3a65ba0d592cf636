#include <gtest/gtest.h>

#include "pgig/degradation.hpp"
#include "pgig/error.hpp"
#include "pgig/trainer.hpp"
#include "support/test_support.hpp"

using namespace pgig;
using namespace pgig::degrade;

namespace {

DegradationConfig grid2() {
  DegradationConfig c;
  c.image_side = 4;
  c.patch_side = 2;
  return c;
}

}  // namespace

TEST(RankPatches, AllEqualUsesIndexOrder) {
  EXPECT_EQ(rank_patches(Tensor::filled({16}, 1.0), grid2()), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(RankPatches, HotPixelFirst) {
  std::vector<double> v(16, 0.0);
  v[2 * 4 + 1] = 5.0;  // row 2, col 1 lies in patch 2
  const auto order = rank_patches(Tensor::vector(v), grid2());
  EXPECT_EQ(order.front(), 2u);
  EXPECT_EQ(order, (std::vector<std::size_t>{2, 0, 1, 3}));
}

// Patch 0 sums to −3 (|·| = 3), patch 1 to +1: signed puts 1 first, absolute puts 0 first.
TEST(RankPatches, SignedAndAbsoluteDiffer) {
  DegradationConfig c;
  c.image_side = 2;
  c.patch_side = 1;
  const auto map = Tensor::vector({-3, 1, 0, 0});
  c.aggregation = Aggregation::SumSigned;
  EXPECT_EQ(rank_patches(map, c).front(), 1u);
  c.aggregation = Aggregation::SumAbsolute;
  EXPECT_EQ(rank_patches(map, c).front(), 0u);
}

TEST(RankPatches, Errors) {
  auto c = grid2();
  c.patch_side = 3;
  EXPECT_THROW(rank_patches(Tensor::zeros({16}), c), ConfigError);
  EXPECT_THROW(rank_patches(Tensor::zeros({15}), grid2()), ConfigError);
  c = grid2();
  c.max_patches = 5;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Perturb, Contract) {
  RandomSource rng(1);
  const auto img = pgig::testing::random_tensor(rng, {16});
  const std::vector<std::size_t> order{3, 1, 0, 2};
  EXPECT_EQ(perturb(img, order, 0, grid2()), img);
  const auto full = perturb(img, order, 4, grid2());
  for (double v : full.values()) EXPECT_EQ(v, mean(img));
  const auto flat = Tensor::filled({16}, 0.25);
  EXPECT_EQ(perturb(flat, order, 2, grid2()), flat);
  EXPECT_THROW(perturb(img, order, 5, grid2()), ArgumentError);

  // Patch 3 covers rows 2-3, cols 2-3.
  const auto one = perturb(img, order, 1, grid2());
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const bool in = r >= 2 && c >= 2;
      EXPECT_EQ(one[r * 4 + c], in ? mean(img) : img[r * 4 + c]);
    }
  }
}

TEST(Perturb, IncrementalEqualsDirect) {
  RandomSource rng(2);
  const auto img = pgig::testing::random_tensor(rng, {16});
  const std::vector<std::size_t> order{2, 0, 3, 1};
  // Extending from k to k' uses the original image mean, so the results match.
  for (std::size_t k = 0; k <= 4; ++k) {
    for (std::size_t k2 = k; k2 <= 4; ++k2) {
      const auto step = perturb(img, order, k, grid2());
      auto px = step.to_vector();
      const double fill = mean(img);
      for (std::size_t n = k; n < k2; ++n) {
        const std::size_t p = order[n];
        for (std::size_t r = (p / 2) * 2; r < (p / 2) * 2 + 2; ++r) {
          for (std::size_t c = (p % 2) * 2; c < (p % 2) * 2 + 2; ++c) px[r * 4 + c] = fill;
        }
      }
      EXPECT_EQ(Tensor::vector(px), perturb(img, order, k2, grid2()));
    }
  }
}

TEST(Auc, Trapezoid) {
  const std::vector<CurvePoint> pts{{0, 1.0}, {1, 0.5}, {2, 0.0}};
  EXPECT_DOUBLE_EQ(normalized_auc(pts), (0.75 + 0.25) / 2.0);
  const std::vector<CurvePoint> flat{{0, 0.8}, {4, 0.8}};
  EXPECT_DOUBLE_EQ(normalized_auc(flat), 1.0);
  EXPECT_THROW(normalized_auc(std::vector<CurvePoint>{{0, 1.0}}), ArgumentError);
}

TEST(Benchmark, SharedEndpointsAndDeterminism) {
  RandomSource rng(3);
  train::TaskConfig tc;
  tc.train_size = 200;
  tc.val_size = 40;
  tc.test_size = 12;
  const auto task = train::generate_task(tc, rng);
  train::TrainConfig trc;
  trc.epochs = 3;
  const auto fit = train::fit_patterns(train::train(task, trc).network, task.train.images);

  DegradationConfig cfg;
  cfg.method_config.steps = 5;
  cfg.method_config.samples = 4;
  cfg.method_config.baseline_draws = 4;
  cfg.method_config.reference = task.train.images;
  const auto curves = run_benchmark(fit.network, task.test.images, task.test.labels, cfg);
  ASSERT_EQ(curves.size(), 11u);
  for (const auto& c : curves) {
    ASSERT_EQ(c.points.size(), 17u);
    EXPECT_EQ(c.points.front().confidence, curves[0].points.front().confidence);
    EXPECT_EQ(c.points.back().confidence, curves[0].points.back().confidence);
    for (std::size_t k = 0; k < c.points.size(); ++k) EXPECT_EQ(c.points[k].patches, k);
  }
  const auto again = run_benchmark(fit.network, task.test.images, task.test.labels, cfg);
  for (std::size_t m = 0; m < curves.size(); ++m) {
    EXPECT_EQ(again[m].auc, curves[m].auc);
  }

  pgig::testing::TempDir dir("degrade");
  write_curves(dir / "curves.csv", curves);
  write_auc(dir / "auc.csv", curves);
  const auto text = pgig::testing::slurp(dir / "curves.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "patches,vanilla_gradient,gradient_times_input,integrated_gradients,smoothgrad_squared,vargrad,"
            "smoothgrad_ig,expected_gradients,guided_backprop,pattern_attribution,pgig,random_baseline");
  EXPECT_EQ(pgig::testing::slurp(dir / "auc.csv").substr(0, 11), "method,auc\n");

  cfg.explained = ExplainedClass::TrueLabel;
  cfg.max_patches = 3;
  cfg.methods = {Method::VanillaGradient};
  const auto labelled = run_benchmark(fit.network, task.test.images, task.test.labels, cfg);
  EXPECT_EQ(labelled.front().points.size(), 4u);

  EXPECT_THROW(run_benchmark(fit.network.without_patterns(), task.test.images, task.test.labels,
                             DegradationConfig{}),
               ConfigError);
}
