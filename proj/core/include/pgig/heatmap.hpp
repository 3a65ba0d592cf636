#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pgig/tensor.hpp"

namespace pgig {

struct Rgb {
  std::uint8_t r = 255;
  std::uint8_t g = 255;
  std::uint8_t b = 255;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Diverging map: −bound is pure blue, 0 white, +bound pure red, linear in
/// between on each side. Values beyond the bound clamp. bound == 0 maps to white.
Rgb diverging_color(double value, double bound);

struct HeatmapImage {
  std::size_t width = 0;
  std::size_t height = 0;
  double bound = 0.0;  ///< max |value| of the rendered map
  std::vector<Rgb> pixels;
};

/// Renders a row-major width × height map; each value becomes a
/// pixel_scale × pixel_scale block.
HeatmapImage render_heatmap(const Tensor& values, std::size_t width, std::size_t height,
                            std::size_t pixel_scale = 1);

/// Binary PPM (P6, max value 255).
void write_ppm(std::ostream& out, const HeatmapImage& image);
void write_ppm(const std::filesystem::path& path, const HeatmapImage& image);

}  // namespace pgig
