#include "pgig/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "pgig/csv.hpp"
#include "pgig/error.hpp"
#include "pgig/random.hpp"

namespace pgig::degrade {

void DegradationConfig::validate() const {
  if (patch_side == 0 || image_side == 0 || image_side % patch_side != 0) {
    throw ConfigError("patch side " + std::to_string(patch_side) + " does not tile image side " +
                      std::to_string(image_side));
  }
  if (max_patches && *max_patches > grid_size()) {
    throw ConfigError("max patches " + std::to_string(*max_patches) + " exceeds grid of " +
                      std::to_string(grid_size()));
  }
  if (methods.empty()) throw ConfigError("no methods to benchmark");
}

std::vector<std::size_t> rank_patches(const Tensor& saliency, const DegradationConfig& cfg) {
  cfg.validate();
  if (saliency.size() != cfg.image_side * cfg.image_side) {
    throw ConfigError("saliency of " + std::to_string(saliency.size()) + " values cannot be tiled as a " +
                      std::to_string(cfg.image_side) + "x" + std::to_string(cfg.image_side) + " image");
  }
  const std::size_t g = cfg.grid_side();
  std::vector<double> score(cfg.grid_size(), 0.0);
  for (std::size_t r = 0; r < cfg.image_side; ++r) {
    for (std::size_t c = 0; c < cfg.image_side; ++c) {
      const double v = saliency[r * cfg.image_side + c];
      score[(r / cfg.patch_side) * g + c / cfg.patch_side] +=
          cfg.aggregation == Aggregation::SumAbsolute ? std::abs(v) : v;
    }
  }
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return order;
}

std::vector<std::size_t> rank_patches(const AttributionMap& map, const DegradationConfig& cfg) {
  return rank_patches(map.values, cfg);
}

Tensor perturb(const Tensor& image, std::span<const std::size_t> ranked, std::size_t k,
               const DegradationConfig& cfg) {
  cfg.validate();
  if (k > ranked.size()) {
    throw ArgumentError("cannot perturb " + std::to_string(k) + " patches from a ranking of " +
                        std::to_string(ranked.size()));
  }
  if (image.size() != cfg.image_side * cfg.image_side) {
    throw DimensionError("image of " + std::to_string(image.size()) + " pixels is not " +
                         std::to_string(cfg.image_side) + "x" + std::to_string(cfg.image_side));
  }
  const double fill = mean(image);
  const std::size_t g = cfg.grid_side();
  std::vector<double> px = image.to_vector();
  for (std::size_t n = 0; n < k; ++n) {
    const std::size_t patch = ranked[n];
    if (patch >= cfg.grid_size()) throw ArgumentError("patch index " + std::to_string(patch) + " out of range");
    const std::size_t r0 = (patch / g) * cfg.patch_side, c0 = (patch % g) * cfg.patch_side;
    for (std::size_t r = r0; r < r0 + cfg.patch_side; ++r) {
      for (std::size_t c = c0; c < c0 + cfg.patch_side; ++c) px[r * cfg.image_side + c] = fill;
    }
  }
  return Tensor(image.shape(), std::move(px));
}

double normalized_auc(std::span<const CurvePoint> points) {
  if (points.size() < 2) throw ArgumentError("a curve needs at least two points");
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double width = static_cast<double>(points[i + 1].patches - points[i].patches);
    area += 0.5 * width * (points[i].confidence + points[i + 1].confidence);
  }
  const double denom = static_cast<double>(points.back().patches) * points.front().confidence;
  if (!(denom > 0.0)) throw NumericError("AUC normalizer is not positive");
  return area / denom;
}

std::vector<DegradationCurve> run_benchmark(const Network& net, std::span<const Tensor> images,
                                            std::span<const std::size_t> labels,
                                            const DegradationConfig& cfg) {
  cfg.validate();
  if (images.empty()) throw ArgumentError("degradation benchmark needs at least one image");
  if (cfg.explained == ExplainedClass::TrueLabel && labels.size() != images.size()) {
    throw ArgumentError("true-label explanations need one label per image");
  }
  for (Method m : cfg.methods) {
    if (requires_patterns(m) && !net.has_patterns()) {
      throw ConfigError(std::string(method_name(m)) + " needs a network with patterns attached");
    }
  }
  const std::size_t kmax = cfg.patch_limit();

  // totals[m][k], summed over images in index order.
  std::vector<std::vector<double>> totals(cfg.methods.size(), std::vector<double>(kmax + 1, 0.0));
  for (std::size_t n = 0; n < images.size(); ++n) {
    const Tensor& image = images[n];
    const Tensor clean = predict(net, image);
    const std::size_t cls = cfg.explained == ExplainedClass::TrueLabel ? labels[n] : argmax(clean);
    if (cls >= net.output_dim()) throw ArgumentError("label " + std::to_string(cls) + " out of range");

    MethodConfig mc = cfg.method_config;
    mc.random_seed = derive_seed(cfg.method_config.random_seed, n);
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      const AttributionMap map = attribute(cfg.methods[mi], net, image, cls, mc);
      const auto ranked = rank_patches(map, cfg);
      totals[mi][0] += clean[cls];
      for (std::size_t k = 1; k <= kmax; ++k) {
        totals[mi][k] += predict(net, perturb(image, ranked, k, cfg))[cls];
      }
    }
  }

  std::vector<DegradationCurve> curves;
  const double count = static_cast<double>(images.size());
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    DegradationCurve curve{cfg.methods[mi], {}, 0.0};
    for (std::size_t k = 0; k <= kmax; ++k) curve.points.push_back({k, totals[mi][k] / count});
    curve.auc = normalized_auc(curve.points);
    curves.push_back(std::move(curve));
  }
  return curves;
}

void write_curves(const std::filesystem::path& path, const std::vector<DegradationCurve>& curves) {
  if (curves.empty()) throw ArgumentError("no curves to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path.string() + " for writing");
  out << "patches";
  for (const auto& c : curves) out << ',' << method_name(c.method);
  out << '\n';
  for (std::size_t k = 0; k < curves.front().points.size(); ++k) {
    out << curves.front().points[k].patches;
    for (const auto& c : curves) out << ',' << format_number(c.points[k].confidence);
    out << '\n';
  }
}

void write_auc(const std::filesystem::path& path, const std::vector<DegradationCurve>& curves) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path.string() + " for writing");
  out << "method,auc\n";
  for (const auto& c : curves) out << method_name(c.method) << ',' << format_number(c.auc) << '\n';
}

}  // namespace pgig::degrade
