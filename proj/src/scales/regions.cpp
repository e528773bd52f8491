#include "rppg/scales/regions.hpp"

#include <algorithm>
#include <cmath>

#include "rppg/errors.hpp"

namespace rppg::scales {

namespace {

using video::Point;

// Landmark index paths for the cheek and nose polygons (iBUG 68-point
// layout): cheeks run under the eye, past the nostril and mouth corner, and
// back up the jaw line; the nose spans the bridge top and the nostril arc.
constexpr int kCheekA[] = {36, 41, 40, 39, 31, 48, 4, 3, 2, 1};    // smaller x
constexpr int kCheekB[] = {45, 46, 47, 42, 35, 54, 12, 13, 14, 15};  // larger x
constexpr int kBrowA[] = {17, 18, 19, 20, 21};
constexpr int kBrowB[] = {22, 23, 24, 25, 26};
constexpr int kNose[] = {27, 35, 34, 33, 32, 31};
constexpr double kForeheadLift = 0.6;  // fraction of brow-to-chin distance

std::vector<Point> pick(const video::LandmarkSet& lm, const int* idx,
                        std::size_t n) {
  std::vector<Point> poly;
  poly.reserve(n);
  for (std::size_t i = 0; i < n; ++i) poly.push_back(lm.points[idx[i]]);
  return poly;
}

// Brow landmarks plus the same points lifted toward the top of the frame.
std::vector<Point> forehead_polygon(const video::LandmarkSet& lm,
                                    const int* brow, std::size_t n,
                                    double chin_y) {
  double brow_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) brow_y += lm.points[brow[i]].y;
  brow_y /= static_cast<double>(n);
  const double lift = kForeheadLift * (chin_y - brow_y);

  std::vector<Point> poly;
  poly.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) poly.push_back(lm.points[brow[i]]);
  for (std::size_t i = n; i-- > 0;) {
    Point p = lm.points[brow[i]];
    p.y = std::max(0.0, p.y - lift);
    poly.push_back(p);
  }
  return poly;
}

double centroid_x(const std::vector<Point>& poly) {
  double sum = 0.0;
  for (const Point& p : poly) sum += p.x;
  return sum / static_cast<double>(poly.size());
}

}  // namespace

double polygon_area(const std::vector<Point>& poly) {
  if (poly.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return std::abs(acc) / 2.0;
}

video::RoiMask rasterize_polygon(const std::vector<Point>& poly, int width,
                                 int height) {
  video::RoiMask mask = video::RoiMask::filled(width, height, 0);
  if (poly.size() < 3) return mask;

  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point& a = poly[i];
      const Point& b = poly[(i + 1) % poly.size()];
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) {
        const double t = (yc - a.y) / (b.y - a.y);
        xs.push_back(a.x + t * (b.x - a.x));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      // Pixel centers x+0.5 in [xs[i], xs[i+1]).
      int x_begin = static_cast<int>(std::ceil(xs[i] - 0.5));
      int x_end = static_cast<int>(std::ceil(xs[i + 1] - 0.5));
      x_begin = std::max(x_begin, 0);
      x_end = std::min(x_end, width);
      for (int x = x_begin; x < x_end; ++x) mask.set(x, y, true);
    }
  }
  return mask;
}

std::array<RegionSpec, 5> regions_from_landmarks(const video::LandmarkSet& lm,
                                                 int width, int height) {
  if (lm.points.size() != 68)
    fail(Errc::BadLandmarks, "scales.regions", "expected 68 landmarks");
  (void)width;
  (void)height;

  const double chin_y = lm.points[8].y;
  std::vector<Point> forehead_a =
      forehead_polygon(lm, kBrowA, std::size(kBrowA), chin_y);
  std::vector<Point> forehead_b =
      forehead_polygon(lm, kBrowB, std::size(kBrowB), chin_y);
  std::vector<Point> cheek_a = pick(lm, kCheekA, std::size(kCheekA));
  std::vector<Point> cheek_b = pick(lm, kCheekB, std::size(kCheekB));
  std::vector<Point> nose = pick(lm, kNose, std::size(kNose));

  // Left/right by centroid: the mirror image of a face swaps the names.
  if (centroid_x(forehead_a) > centroid_x(forehead_b))
    std::swap(forehead_a, forehead_b);
  if (centroid_x(cheek_a) > centroid_x(cheek_b)) std::swap(cheek_a, cheek_b);

  std::array<RegionSpec, 5> regions = {
      RegionSpec{RegionName::right_forehead, std::move(forehead_b)},
      RegionSpec{RegionName::left_forehead, std::move(forehead_a)},
      RegionSpec{RegionName::right_cheek, std::move(cheek_b)},
      RegionSpec{RegionName::left_cheek, std::move(cheek_a)},
      RegionSpec{RegionName::nose, std::move(nose)},
  };

  for (const RegionSpec& r : regions) {
    if (polygon_area(r.polygon) < 25.0)
      fail(Errc::DegenerateLandmarks, "scales.regions",
           std::string(region_name_str(r.name)) + " polygon area below 25 px^2");
  }
  return regions;
}

std::array<video::RoiMask, 5> region_masks(
    const std::array<RegionSpec, 5>& regions, int width, int height) {
  std::array<video::RoiMask, 5> masks;
  video::RoiMask claimed = video::RoiMask::filled(width, height, 0);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    masks[i] = rasterize_polygon(regions[i].polygon, width, height);
    for (std::size_t j = 0; j < masks[i].bits.size(); ++j) {
      if (claimed.bits[j]) masks[i].bits[j] = 0;
      if (masks[i].bits[j]) claimed.bits[j] = 1;
    }
  }
  return masks;
}

}  // namespace rppg::scales
