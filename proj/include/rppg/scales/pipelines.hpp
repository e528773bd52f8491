#pragma once

#include <array>
#include <optional>
#include <span>

#include "rppg/core/types.hpp"
#include "rppg/scales/types.hpp"
#include "rppg/video/image.hpp"

namespace rppg::scales {

struct PipelineOptions {
  bool register_frames = false;  // translation registration against frame 0
  bool skin_seg = false;         // intersect masks with the skin segmentation
  int threads = 1;
  int pyramid_target_px = 10000;  // local analysis only
};

// Sample indices at which sliding windows start; the last partial window is
// dropped.
std::vector<std::size_t> window_starts(std::size_t n_samples, double fs,
                                       const core::AnalysisConfig& cfg);

struct GlobalResult {
  MetricsTimeline roi;
  // Metrics of the reference region; empty when the reference is an external
  // heart rate (a synthetic sine has no perfusion metrics of its own).
  MetricsTimeline reference;
};

// Whole-ROI analysis. Exactly one reference source is required: a reference
// mask or an external heart rate (Hz). rho_ref correlates the ROI pulse
// signal with the reference region's (or, for an external rate, with the
// best-phase sine at that frequency).
GlobalResult analyze_global(const video::FrameSequence& seq,
                            const video::RoiMask& roi,
                            const video::RoiMask* ref,
                            const core::AnalysisConfig& cfg,
                            std::optional<double> external_hr = {},
                            const PipelineOptions& opt = {});

struct RegionsResult {
  std::array<MetricsTimeline, 5> timelines;  // canonical region order
  std::size_t reference_index = 0;           // chosen reference region
};

// Per-region analysis from landmarks (one static set or one per frame).
// rho_ref is computed against the region selected by the highest mean SNR;
// the reference region's own rho_ref is 1 by definition.
RegionsResult analyze_regions(const video::FrameSequence& seq,
                              std::span<const video::LandmarkSet> landmarks,
                              const core::AnalysisConfig& cfg,
                              const PipelineOptions& opt = {});

struct LocalResult {
  int level = 0;  // pyramid level the maps live at
  int width = 0;
  int height = 0;
  std::vector<PerfusionMapSet> windows;
  MetricsTimeline reference;  // empty for an external heart rate
};

// Per-pixel analysis at the pyramid level closest to opt.pyramid_target_px.
// The SNR/magnitude maps are evaluated at the global per-window f_hr taken
// from the reference; the bpm map carries each pixel's own estimate. An
// optional ROI restricts the defined pixels.
LocalResult analyze_local(const video::FrameSequence& seq,
                          const video::RoiMask* roi,
                          const video::RoiMask* ref,
                          const core::AnalysisConfig& cfg,
                          std::optional<double> external_hr = {},
                          const PipelineOptions& opt = {});

// Time coordinate (window t_start) of the maximum of the min-max normalized
// PI series; ties resolve to the earliest window. NaN for an empty timeline.
double reperfusion_event_time(const MetricsTimeline& tl);

}  // namespace rppg::scales
