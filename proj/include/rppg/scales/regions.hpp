#pragma once

#include <array>

#include "rppg/scales/types.hpp"
#include "rppg/video/image.hpp"

namespace rppg::scales {

// Builds the five analysis regions from a 68-point landmark set, in canonical
// order. Forehead polygons are synthesized by lifting the eyebrow landmarks
// (the 68-point scheme has no forehead points); left/right names follow the
// region centroids in image coordinates. Any polygon with area < 25 px^2
// raises DegenerateLandmarks.
std::array<RegionSpec, 5> regions_from_landmarks(const video::LandmarkSet& lm,
                                                 int width, int height);

// Shoelace area of a polygon, px^2.
double polygon_area(const std::vector<video::Point>& poly);

// Even-odd rasterization at pixel centers, clipped to width x height.
video::RoiMask rasterize_polygon(const std::vector<video::Point>& poly,
                                 int width, int height);

// Rasterizes the five regions and removes overlaps in canonical order, so the
// returned masks are pairwise disjoint.
std::array<video::RoiMask, 5> region_masks(const std::array<RegionSpec, 5>& regions,
                                           int width, int height);

}  // namespace rppg::scales
