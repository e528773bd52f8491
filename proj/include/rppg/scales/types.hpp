#pragma once

#include <array>
#include <string>
#include <vector>

#include "rppg/core/types.hpp"
#include "rppg/video/image.hpp"

namespace rppg::scales {

// One metrics record per sliding-window step, t_start increasing by t_step.
struct MetricsTimeline {
  double fs = 0.0;
  core::AnalysisConfig cfg;
  std::vector<core::WindowMetrics> entries;
};

// The five facial analysis regions, in canonical order. "left"/"right" are
// image coordinates (left = smaller x).
enum class RegionName {
  right_forehead = 0,
  left_forehead = 1,
  right_cheek = 2,
  left_cheek = 3,
  nose = 4,
};

inline constexpr std::array<RegionName, 5> kRegionOrder = {
    RegionName::right_forehead, RegionName::left_forehead,
    RegionName::right_cheek, RegionName::left_cheek, RegionName::nose};

inline const char* region_name_str(RegionName r) {
  switch (r) {
    case RegionName::right_forehead: return "right-forehead";
    case RegionName::left_forehead: return "left-forehead";
    case RegionName::right_cheek: return "right-cheek";
    case RegionName::left_cheek: return "left-cheek";
    case RegionName::nose: return "nose";
  }
  return "unknown";
}

struct RegionSpec {
  RegionName name = RegionName::nose;
  std::vector<video::Point> polygon;
};

// Per-pixel maps at one pyramid level; NaN marks absent (undefined) pixels.
// The absent set is identical across the four maps.
struct PerfusionMapSet {
  int width = 0;
  int height = 0;
  std::vector<double> magnitude;
  std::vector<double> snr_db;
  std::vector<double> rho_ref;
  std::vector<double> bpm;
};

}  // namespace rppg::scales
