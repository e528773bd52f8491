#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "rppg/scales/io.hpp"
#include "rppg/scales/types.hpp"
#include "rppg/video/image.hpp"

namespace rppg::render {

struct HeatmapOptions {
  // Fixed value range; by default the matrix's own [min, max] is used.
  std::optional<double> range_min;
  std::optional<double> range_max;
  // Mask whose boundary is overdrawn as a contour (e.g. a reference region).
  const video::RoiMask* contour = nullptr;
};

// Diverging blue-white-red colormap entry, index 0..255. The red channel is
// monotone in the index.
std::array<std::uint8_t, 3> colormap_entry(int index);

// Renders a value matrix to an RGB image: low values blue, high values red,
// absent (NaN) cells gray. A degenerate range (min = max) maps every defined
// cell to the white center of the scale.
video::Image render_heatmap(const scales::MapMatrix& matrix,
                            const HeatmapOptions& options = {});

// Simple polyline plot of a series on a white canvas, y min-max normalized.
video::Image render_line_plot(const std::vector<double>& values, int width,
                              int height);

}  // namespace rppg::render
