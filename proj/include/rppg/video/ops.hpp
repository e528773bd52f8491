#pragma once

#include "rppg/video/image.hpp"

namespace rppg::video {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

// Arithmetic mean of each channel over the set pixels of the mask.
Rgb mean_rgb_over_mask(const Image& frame, const RoiMask& mask);

struct Shift {
  int dx = 0;
  int dy = 0;
  bool confident = true;    // false when the correlation peak is ambiguous
  double peak_ratio = 0.0;  // primary peak vs. best peak elsewhere
};

// Integer translation that realigns `moving` to `reference`, found by phase
// correlation over the search mask's bounding box. An ambiguous correlation
// surface (peak ratio < 2) yields (0, 0) with confident = false.
Shift register_translation(const Image& reference, const Image& moving,
                           const RoiMask& search);

// Shifts the image by (dx, dy), replicating edge pixels into exposed areas.
Image translate_clamp(const Image& img, int dx, int dy);

// Pointwise YCbCr (full-range BT.601) skin thresholds:
// 77 <= Cb <= 127 and 133 <= Cr <= 173.
RoiMask skin_segment(const Image& frame);

// Number of blur+decimate steps that brings width x height closest to
// target_px (ties toward the deeper level).
int pyramid_level_for(int width, int height, int target_px);

// Dimension after `level` decimations (each step rounds up).
int dim_at_level(int dim, int level);

// One pyramid step: 5x5 Gaussian blur (sigma = 1) then keep even rows/cols.
Image pyramid_step(const Image& img);

// Gaussian pyramid downscaling of every frame to the level chosen by
// pyramid_level_for. Frames may be processed in parallel.
FrameSequence pyramid_downscale(const FrameSequence& seq, int target_px = 10000,
                                int threads = 1);

// Carries a full-resolution mask down `levels` decimations (no blur).
RoiMask mask_at_level(const RoiMask& mask, int levels);

}  // namespace rppg::video
