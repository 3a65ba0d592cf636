#include "pgig/attribution.hpp"

#include <array>
#include <functional>

#include "pgig/csv.hpp"
#include "pgig/error.hpp"
#include "pgig/random.hpp"

namespace pgig {

namespace {

constexpr std::array kMethods = {
    Method::VanillaGradient, Method::GradientTimesInput, Method::IntegratedGradients,
    Method::SmoothGradSquared, Method::VarGrad, Method::SmoothGradIG,
    Method::ExpectedGradients, Method::GuidedBackprop, Method::PatternAttribution,
    Method::Pgig, Method::RandomBaseline,
};

// Running mean in index order. Identical inputs give back that input exactly.
class RunningMean {
 public:
  explicit RunningMean(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  void add(std::span<const double> v) {
    ++count_;
    const double n = static_cast<double>(count_);
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      const double delta = v[i] - mean_[i];
      mean_[i] += delta / n;
      m2_[i] += delta * (v[i] - mean_[i]);
    }
  }

  const std::vector<double>& mean() const { return mean_; }

  std::vector<double> population_variance() const {
    std::vector<double> out(m2_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = m2_[i] / static_cast<double>(count_);
    return out;
  }

 private:
  std::vector<double> mean_;
  std::vector<double> m2_;
  std::size_t count_ = 0;
};

// The network actually explained: the softmax is dropped when explaining logits.
class Explained {
 public:
  Explained(const Network& net, const MethodConfig& cfg) : net_(&net) {
    if (cfg.explain_logits && net.output_mode() == OutputMode::Softmax) {
      owned_.emplace(net.with_output_mode(OutputMode::Raw));
      net_ = &*owned_;
    }
  }
  const Network& operator*() const { return *net_; }

 private:
  const Network* net_;
  std::optional<Network> owned_;
};

// Runs one step, rewrapping numeric failures with the method and step name.
template <typename Fn>
auto step(Method m, const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericError& e) {
    throw NumericError(std::string(method_name(m)) + " [" + name + "]: " + e.what());
  }
}

// Input gradient at `point`. With seed_with_output the one-hot seed carries ŷ.
Tensor gradient(const Network& net, const Tensor& point, Target target, BackwardMode mode,
                bool seed_with_output) {
  const ForwardTrace trace = forward(net, point);
  const BackwardMode seed_mode = seed_with_output ? BackwardMode::Pattern : BackwardMode::Standard;
  const Tensor seed = output_grad_seed(net, trace, target, seed_mode);
  return backward(net, trace, seed, mode);
}

std::vector<double> baseline_of(const MethodConfig& cfg, const Tensor& x) {
  if (cfg.baseline) return cfg.baseline->to_vector();
  return std::vector<double>(x.size(), 0.0);
}

// x̄ + (k/m)(x − x̄), elementwise.
Tensor path_point(std::span<const double> base, std::span<const double> x, std::size_t k, std::size_t m) {
  const double t = static_cast<double>(k) / static_cast<double>(m);
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = base[i] + t * (x[i] - base[i]);
  return Tensor::vector(std::move(p));
}

Tensor noisy(const Tensor& x, RandomSource& rng, const MethodConfig& cfg) {
  std::vector<double> v = x.to_vector();
  for (double& e : v) e += rng.normal(cfg.noise_mu, cfg.noise_sigma);
  return Tensor::vector(std::move(v));
}

// (x − x̄) ⊙ mean gradient, the closing step of every path method.
Tensor scale_by_path(std::span<const double> x, std::span<const double> base, const std::vector<double>& mean) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x[i] - base[i]) * mean[i];
  return Tensor::vector(std::move(out));
}

AttributionMap make_map(Method m, Tensor values, Target target,
                        std::vector<std::pair<std::string, std::string>> meta = {}) {
  require_finite(values.values(), std::string(method_name(m)) + " result");
  return AttributionMap{std::move(values), m, target, std::move(meta)};
}

std::pair<std::string, std::string> meta(std::string key, double v) { return {std::move(key), format_number(v)}; }
std::pair<std::string, std::string> meta(std::string key, std::size_t v) { return {std::move(key), std::to_string(v)}; }

void require_pattern_net(Method m, const Network& net) {
  if (!net.has_patterns()) {
    throw ConfigError(std::string(method_name(m)) + " needs a network with patterns attached");
  }
}

// Shared IG/PGIG path average.
AttributionMap path_method(Method m, const Network& net, const Tensor& x, Target target,
                           const MethodConfig& cfg, BackwardMode mode, bool seed_with_output) {
  const auto base = baseline_of(cfg, x);
  RunningMean avg(x.size());
  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    const Tensor g = step(m, "path step " + std::to_string(k), [&] {
      return gradient(net, path_point(base, x.values(), k, cfg.steps), target, mode, seed_with_output);
    });
    avg.add(g.values());
  }
  return make_map(m, scale_by_path(x.values(), base, avg.mean()), target,
                  {meta("steps", cfg.steps), {"baseline", cfg.baseline ? "explicit" : "zero"}});
}

}  // namespace

std::span<const Method> all_methods() { return kMethods; }

std::string_view method_name(Method m) {
  switch (m) {
    case Method::VanillaGradient: return "vanilla_gradient";
    case Method::GradientTimesInput: return "gradient_times_input";
    case Method::IntegratedGradients: return "integrated_gradients";
    case Method::SmoothGradSquared: return "smoothgrad_squared";
    case Method::VarGrad: return "vargrad";
    case Method::SmoothGradIG: return "smoothgrad_ig";
    case Method::ExpectedGradients: return "expected_gradients";
    case Method::GuidedBackprop: return "guided_backprop";
    case Method::PatternAttribution: return "pattern_attribution";
    case Method::Pgig: return "pgig";
    case Method::RandomBaseline: return "random_baseline";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kMethods) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string method_names() {
  std::string out;
  for (Method m : kMethods) {
    if (!out.empty()) out += ", ";
    out += method_name(m);
  }
  return out;
}

bool requires_patterns(Method m) { return m == Method::PatternAttribution || m == Method::Pgig; }

void MethodConfig::validate(const Tensor& x) const {
  if (steps < 1) throw ArgumentError("steps must be >= 1");
  if (samples < 1) throw ArgumentError("samples must be >= 1");
  if (baseline_draws < 1) throw ArgumentError("baseline_draws must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ArgumentError("noise sigma must be finite and >= 0");
  if (!std::isfinite(noise_mu)) throw ArgumentError("noise mu must be finite");
  if (baseline && !baseline->same_shape(x)) {
    throw DimensionError("baseline " + shape_string(baseline->shape()) + " does not match input " +
                         shape_string(x.shape()));
  }
}

AttributionMap vanilla_gradient(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  const Explained e(net, cfg);
  Tensor g = step(Method::VanillaGradient, "gradient", [&] {
    return gradient(*e, x, target, BackwardMode::Standard, false);
  });
  return make_map(Method::VanillaGradient, std::move(g), target);
}

AttributionMap gradient_times_input(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  const Explained e(net, cfg);
  const Tensor g = step(Method::GradientTimesInput, "gradient", [&] {
    return gradient(*e, x, target, BackwardMode::Standard, false);
  });
  return make_map(Method::GradientTimesInput, hadamard(x, g), target);
}

AttributionMap integrated_gradients(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  const Explained e(net, cfg);
  return path_method(Method::IntegratedGradients, *e, x, target, cfg, BackwardMode::Standard, false);
}

AttributionMap smoothgrad_squared(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  const Explained e(net, cfg);
  RandomSource rng(cfg.random_seed);
  RunningMean avg(x.size());
  std::vector<double> sq(x.size());
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const Tensor g = step(Method::SmoothGradSquared, "sample " + std::to_string(s), [&] {
      return gradient(*e, noisy(x, rng, cfg), target, BackwardMode::Standard, false);
    });
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = g[i] * g[i];
    avg.add(sq);
  }
  return make_map(Method::SmoothGradSquared, Tensor::vector(avg.mean()), target,
                  {meta("samples", cfg.samples), meta("noise_mu", cfg.noise_mu),
                   meta("noise_sigma", cfg.noise_sigma), {"seed", std::to_string(cfg.random_seed)}});
}

AttributionMap vargrad(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  const Explained e(net, cfg);
  RandomSource rng(cfg.random_seed);
  RunningMean avg(x.size());
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const Tensor g = step(Method::VarGrad, "sample " + std::to_string(s), [&] {
      return gradient(*e, noisy(x, rng, cfg), target, BackwardMode::Standard, false);
    });
    avg.add(g.values());
  }
  return make_map(Method::VarGrad, Tensor::vector(avg.population_variance()), target,
                  {meta("samples", cfg.samples), meta("noise_mu", cfg.noise_mu),
                   meta("noise_sigma", cfg.noise_sigma), {"seed", std::to_string(cfg.random_seed)}});
}

AttributionMap smoothgrad_ig(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  const Explained e(net, cfg);
  const auto base = baseline_of(cfg, x);
  RandomSource rng(cfg.random_seed);
  RunningMean outer(x.size());
  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    RunningMean inner(x.size());
    for (std::size_t s = 0; s < cfg.samples; ++s) {
      const Tensor g = step(Method::SmoothGradIG, "step " + std::to_string(k) + " sample " + std::to_string(s), [&] {
        const Tensor xn = noisy(x, rng, cfg);
        return gradient(*e, path_point(base, xn.values(), k, cfg.steps), target, BackwardMode::Standard, false);
      });
      inner.add(g.values());
    }
    outer.add(inner.mean());
  }
  return make_map(Method::SmoothGradIG, scale_by_path(x.values(), base, outer.mean()), target,
                  {meta("steps", cfg.steps), meta("samples", cfg.samples), meta("noise_mu", cfg.noise_mu),
                   meta("noise_sigma", cfg.noise_sigma), {"seed", std::to_string(cfg.random_seed)}});
}

AttributionMap expected_gradients(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  if (cfg.reference.empty()) throw ConfigError("expected_gradients needs a reference dataset");
  const Explained e(net, cfg);
  RandomSource rng(cfg.random_seed);
  RunningMean avg(x.size());
  std::vector<double> contrib(x.size());
  for (std::size_t d = 0; d < cfg.baseline_draws; ++d) {
    const Tensor& ref = cfg.reference[rng.below(cfg.reference.size())];
    if (!ref.same_shape(x)) {
      throw DimensionError("reference example " + shape_string(ref.shape()) + " does not match input " +
                           shape_string(x.shape()));
    }
    const double alpha = rng.uniform();
    std::vector<double> point(x.size());
    for (std::size_t i = 0; i < point.size(); ++i) point[i] = ref[i] + alpha * (x[i] - ref[i]);
    const Tensor g = step(Method::ExpectedGradients, "draw " + std::to_string(d), [&] {
      return gradient(*e, Tensor::vector(std::move(point)), target, BackwardMode::Standard, false);
    });
    for (std::size_t i = 0; i < contrib.size(); ++i) contrib[i] = (x[i] - ref[i]) * g[i];
    avg.add(contrib);
  }
  return make_map(Method::ExpectedGradients, Tensor::vector(avg.mean()), target,
                  {meta("baseline_draws", cfg.baseline_draws), {"seed", std::to_string(cfg.random_seed)}});
}

AttributionMap guided_backprop(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  const Explained e(net, cfg);
  Tensor g = step(Method::GuidedBackprop, "gradient", [&] {
    return gradient(*e, x, target, BackwardMode::Guided, false);
  });
  return make_map(Method::GuidedBackprop, std::move(g), target);
}

AttributionMap pattern_attribution(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  require_pattern_net(Method::PatternAttribution, net);
  const Explained e(net, cfg);
  Tensor g = step(Method::PatternAttribution, "pattern gradient", [&] {
    return gradient(*e, x, target, BackwardMode::Pattern, true);
  });
  return make_map(Method::PatternAttribution, std::move(g), target);
}

AttributionMap pgig(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  require_pattern_net(Method::Pgig, net);
  const Explained e(net, cfg);
  AttributionMap map = path_method(Method::Pgig, *e, x, target, cfg, BackwardMode::Pattern,
                                   cfg.pgig_seed == PathSeed::Output);
  map.metadata.emplace_back("path_seed", cfg.pgig_seed == PathSeed::Output ? "output" : "unit");
  return map;
}

AttributionMap random_baseline(const Network& net, const Tensor& x, Target target, const MethodConfig& cfg) {
  cfg.validate(x);
  if (x.size() != net.input_dim()) {
    throw DimensionError("random_baseline: input " + shape_string(x.shape()) + " does not match network input");
  }
  RandomSource rng(cfg.random_seed);
  return make_map(Method::RandomBaseline, uniform(rng, x.size()), target,
                  {{"seed", std::to_string(cfg.random_seed)}});
}

AttributionMap attribute(Method method, const Network& net, const Tensor& x, Target target,
                         const MethodConfig& cfg) {
  switch (method) {
    case Method::VanillaGradient: return vanilla_gradient(net, x, target, cfg);
    case Method::GradientTimesInput: return gradient_times_input(net, x, target, cfg);
    case Method::IntegratedGradients: return integrated_gradients(net, x, target, cfg);
    case Method::SmoothGradSquared: return smoothgrad_squared(net, x, target, cfg);
    case Method::VarGrad: return vargrad(net, x, target, cfg);
    case Method::SmoothGradIG: return smoothgrad_ig(net, x, target, cfg);
    case Method::ExpectedGradients: return expected_gradients(net, x, target, cfg);
    case Method::GuidedBackprop: return guided_backprop(net, x, target, cfg);
    case Method::PatternAttribution: return pattern_attribution(net, x, target, cfg);
    case Method::Pgig: return pgig(net, x, target, cfg);
    case Method::RandomBaseline: return random_baseline(net, x, target, cfg);
  }
  throw ArgumentError("unknown method");
}

}  // namespace pgig
