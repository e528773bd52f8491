#include "rppg/render/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rppg/errors.hpp"

namespace rppg::render {
namespace {

constexpr std::uint8_t kAbsentGray = 128;
constexpr std::uint8_t kContourGray = 64;

bool is_boundary(const video::RoiMask& m, int x, int y) {
  if (!m.at(x, y)) return false;
  if (x == 0 || y == 0 || x == m.width - 1 || y == m.height - 1) return true;
  return !m.at(x - 1, y) || !m.at(x + 1, y) || !m.at(x, y - 1) ||
         !m.at(x, y + 1);
}

}  // namespace

std::array<std::uint8_t, 3> colormap_entry(int index) {
  const int i = std::clamp(index, 0, 255);
  if (i <= 127) {
    const double t = static_cast<double>(i) / 127.0;
    const auto ramp = static_cast<std::uint8_t>(std::lround(255.0 * t));
    return {ramp, ramp, 255};
  }
  const double t = static_cast<double>(i - 128) / 127.0;
  const auto ramp = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t)));
  return {255, ramp, ramp};
}

video::Image render_heatmap(const scales::MapMatrix& matrix,
                            const HeatmapOptions& options) {
  if (matrix.width <= 0 || matrix.height <= 0 || matrix.values.empty())
    fail(Errc::EmptyMatrix, "render.heatmap", "matrix has no cells");
  if (matrix.values.size() !=
      static_cast<std::size_t>(matrix.width) * matrix.height)
    fail(Errc::DimensionMismatch, "render.heatmap",
         "value count does not match the declared dimensions");
  if (options.contour != nullptr &&
      (options.contour->width != matrix.width ||
       options.contour->height != matrix.height))
    fail(Errc::DimensionMismatch, "render.heatmap",
         "contour mask does not match the matrix dimensions");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : matrix.values) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) {  // every cell absent
    lo = 0.0;
    hi = 0.0;
  }
  if (options.range_min) lo = *options.range_min;
  if (options.range_max) hi = *options.range_max;
  const double span = hi - lo;

  video::Image img;
  img.width = matrix.width;
  img.height = matrix.height;
  img.data.resize(matrix.values.size() * 3);
  for (std::size_t p = 0; p < matrix.values.size(); ++p) {
    const double v = matrix.values[p];
    std::array<std::uint8_t, 3> rgb = {kAbsentGray, kAbsentGray, kAbsentGray};
    if (!std::isnan(v)) {
      const int idx =
          span > 0.0
              ? static_cast<int>(std::lround((v - lo) / span * 255.0))
              : 128;  // degenerate range: the white center of the scale
      rgb = colormap_entry(idx);
    }
    img.data[p * 3] = rgb[0];
    img.data[p * 3 + 1] = rgb[1];
    img.data[p * 3 + 2] = rgb[2];
  }

  if (options.contour != nullptr) {
    for (int y = 0; y < matrix.height; ++y) {
      for (int x = 0; x < matrix.width; ++x) {
        if (!is_boundary(*options.contour, x, y)) continue;
        std::uint8_t* px = img.px(x, y);
        px[0] = kContourGray;
        px[1] = kContourGray;
        px[2] = kContourGray;
      }
    }
  }
  return img;
}

video::Image render_line_plot(const std::vector<double>& values, int width,
                              int height) {
  if (values.empty() || width <= 0 || height <= 0)
    fail(Errc::EmptyMatrix, "render.plot", "nothing to plot");

  video::Image img = video::Image::filled(width, height, 255, 255, 255);
  double lo = values[0];
  double hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  const int margin = 4;
  const int plot_w = std::max(1, width - 2 * margin);
  const int plot_h = std::max(1, height - 2 * margin);

  auto point = [&](std::size_t i) {
    const double fx = values.size() > 1
                          ? static_cast<double>(i) /
                                static_cast<double>(values.size() - 1)
                          : 0.5;
    const double fy = span > 0.0 ? (values[i] - lo) / span : 0.5;
    const int x = margin + static_cast<int>(std::lround(fx * (plot_w - 1)));
    const int y = margin +
                  static_cast<int>(std::lround((1.0 - fy) * (plot_h - 1)));
    return std::pair<int, int>(x, y);
  };
  auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    std::uint8_t* px = img.px(x, y);
    px[0] = 32;
    px[1] = 32;
    px[2] = 160;
  };

  auto [px0, py0] = point(0);
  put(px0, py0);
  for (std::size_t i = 1; i < values.size(); ++i) {
    auto [x0, y0] = point(i - 1);
    auto [x1, y1] = point(i);
    const int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
    for (int s = 0; s <= steps; ++s) {
      const double f = steps > 0 ? static_cast<double>(s) / steps : 0.0;
      put(static_cast<int>(std::lround(x0 + f * (x1 - x0))),
          static_cast<int>(std::lround(y0 + f * (y1 - y0))));
    }
  }
  return img;
}

}  // namespace rppg::render
