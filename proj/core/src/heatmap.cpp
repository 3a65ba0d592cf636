#include "pgig/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "pgig/error.hpp"

namespace pgig {

namespace {

std::uint8_t channel(double fraction) {
  return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(fraction, 0.0, 1.0)));
}

}  // namespace

Rgb diverging_color(double value, double bound) {
  if (!(bound > 0.0)) return {};
  const double t = std::clamp(value / bound, -1.0, 1.0);
  if (t >= 0.0) {
    const std::uint8_t fade = channel(1.0 - t);
    return {255, fade, fade};
  }
  const std::uint8_t fade = channel(1.0 + t);
  return {fade, fade, 255};
}

HeatmapImage render_heatmap(const Tensor& values, std::size_t width, std::size_t height, std::size_t pixel_scale) {
  if (values.size() != width * height) {
    throw DimensionError("heatmap: " + std::to_string(values.size()) + " values do not fill " +
                         std::to_string(width) + "x" + std::to_string(height));
  }
  if (pixel_scale == 0) throw ArgumentError("heatmap: pixel scale must be >= 1");
  HeatmapImage img;
  img.width = width * pixel_scale;
  img.height = height * pixel_scale;
  img.bound = max_abs(values);
  img.pixels.resize(img.width * img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      img.pixels[y * img.width + x] = diverging_color(values[(y / pixel_scale) * width + x / pixel_scale], img.bound);
    }
  }
  return img;
}

void write_ppm(std::ostream& out, const HeatmapImage& image) {
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  for (const Rgb& p : image.pixels) {
    const char rgb[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
    out.write(rgb, 3);
  }
}

void write_ppm(const std::filesystem::path& path, const HeatmapImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path.string() + " for writing");
  write_ppm(out, image);
  if (!out) throw ArgumentError("failed writing " + path.string());
}

}  // namespace pgig
