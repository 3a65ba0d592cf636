#include <benchmark/benchmark.h>

#include "pgig/attribution.hpp"
#include "pgig/network.hpp"
#include "pgig/random.hpp"

namespace {

using namespace pgig;

Tensor uniform(RandomSource& rng, Shape shape, double bound) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> v(n);
  for (auto& x : v) x = bound * (2.0 * rng.uniform() - 1.0);
  return Tensor(std::move(shape), std::move(v));
}

// 256-64-32-4 softmax classifier with patterns on every layer.
const Network& model() {
  static const Network net = [] {
    RandomSource rng(1);
    const std::vector<std::size_t> dims{256, 64, 32, 4};
    std::vector<Layer> layers;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
      const bool last = k + 2 == dims.size();
      layers.push_back(make_layer(uniform(rng, {dims[k + 1], dims[k]}, 0.2), uniform(rng, {dims[k + 1]}, 0.1),
                                  last ? Activation::Linear : Activation::ReLU,
                                  uniform(rng, {dims[k + 1], dims[k]}, 1.0)));
    }
    return Network(std::move(layers), OutputMode::Softmax);
  }();
  return net;
}

Tensor input() {
  RandomSource rng(2);
  return uniform(rng, {256}, 1.0);
}

void BM_Forward(benchmark::State& state) {
  const auto x = input();
  for (auto _ : state) benchmark::DoNotOptimize(predict(model(), x));
}
BENCHMARK(BM_Forward);

void BM_Backward(benchmark::State& state) {
  const auto x = input();
  const auto trace = forward(model(), x);
  const auto seed = output_grad_seed(model(), trace, 0, BackwardMode::Standard);
  for (auto _ : state) benchmark::DoNotOptimize(backward(model(), trace, seed, BackwardMode::Standard));
}
BENCHMARK(BM_Backward);

void BM_IntegratedGradients(benchmark::State& state) {
  const auto x = input();
  MethodConfig cfg;
  cfg.steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrated_gradients(model(), x, 0, cfg));
}
BENCHMARK(BM_IntegratedGradients)->Arg(25)->Arg(100);

void BM_Pgig(benchmark::State& state) {
  const auto x = input();
  MethodConfig cfg;
  cfg.steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pgig::pgig(model(), x, 0, cfg));
}
BENCHMARK(BM_Pgig)->Arg(25)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
