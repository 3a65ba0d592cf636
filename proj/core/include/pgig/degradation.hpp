#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pgig/attribution.hpp"
#include "pgig/network.hpp"
#include "pgig/tensor.hpp"

namespace pgig::degrade {

enum class Aggregation { SumSigned, SumAbsolute };
enum class ExplainedClass { Predicted, TrueLabel };

/// Images are single-channel, square and flattened row-major; patches tile the
/// image without overlap and are numbered row-major over the patch grid.
struct DegradationConfig {
  std::size_t image_side = 16;
  std::size_t patch_side = 4;
  std::optional<std::size_t> max_patches;  ///< default: the whole grid
  Aggregation aggregation = Aggregation::SumSigned;
  std::vector<Method> methods{all_methods().begin(), all_methods().end()};
  ExplainedClass explained = ExplainedClass::Predicted;
  /// Shared method settings; the random seed is re-derived for every image.
  MethodConfig method_config;

  void validate() const;
  std::size_t grid_side() const { return image_side / patch_side; }
  std::size_t grid_size() const { return grid_side() * grid_side(); }
  std::size_t patch_limit() const { return max_patches.value_or(grid_size()); }
};

/// Patch indices by descending aggregated saliency; ties go to the lower index.
std::vector<std::size_t> rank_patches(const Tensor& saliency, const DegradationConfig& cfg);
std::vector<std::size_t> rank_patches(const AttributionMap& map, const DegradationConfig& cfg);

/// Copy of `image` with the first k ranked patches set to the mean of the
/// original image.
Tensor perturb(const Tensor& image, std::span<const std::size_t> ranked, std::size_t k,
               const DegradationConfig& cfg);

struct CurvePoint {
  std::size_t patches = 0;
  double confidence = 0.0;
};

struct DegradationCurve {
  Method method = Method::RandomBaseline;
  std::vector<CurvePoint> points;
  double auc = 0.0;
};

/// Trapezoidal area under the curve over (max k · confidence at k = 0).
double normalized_auc(std::span<const CurvePoint> points);

/// Explains each image once on the clean input, fixes the patch order, then
/// averages the softmax confidence in the explained class over the dataset
/// for k = 0 … patch_limit perturbed patches.
std::vector<DegradationCurve> run_benchmark(const Network& net, std::span<const Tensor> images,
                                            std::span<const std::size_t> labels,
                                            const DegradationConfig& cfg);

/// Header `patches,<method>…`, one row per k.
void write_curves(const std::filesystem::path& path, const std::vector<DegradationCurve>& curves);
/// Header `method,auc`, one row per curve.
void write_auc(const std::filesystem::path& path, const std::vector<DegradationCurve>& curves);

}  // namespace pgig::degrade
