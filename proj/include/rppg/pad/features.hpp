#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rppg/core/types.hpp"
#include "rppg/scales/types.hpp"
#include "rppg/video/image.hpp"

namespace rppg::pad {

// One classifier sample: the three perfusion features of a (region, window).
struct PadSample {
  std::string subject_id;
  std::string region;
  int window_index = 0;
  double snr_db = 0.0;
  double magnitude = 0.0;
  double rho_ref = 0.0;
  int label = 0;  // 0 = no attack, 1 = attack
};

// Index of the timeline with the highest mean snr_db; ties resolve to the
// lower index (the canonical region order when called on the five regions).
std::size_t select_reference_region(
    std::span<const scales::MetricsTimeline> timelines);

// Runs the region-based analysis and flattens it into one sample per
// (region, window), all tagged with the given label and subject.
std::vector<PadSample> extract_feature_table(
    const video::FrameSequence& seq, std::span<const video::LandmarkSet> lm,
    const core::AnalysisConfig& cfg, int label, const std::string& subject_id);

// Greedy subject-disjoint split: no subject appears on both sides. Returns
// one flag per sample (true = test). The test share approaches the target
// fraction from below.
std::vector<std::uint8_t> subject_disjoint_split(
    std::span<const PadSample> samples, double test_fraction);

// CSV: subject_id,region,window,snr_db,magnitude,rho_ref,label
void write_feature_csv(std::span<const PadSample> samples,
                       const std::string& path);
std::vector<PadSample> read_feature_csv(const std::string& path);

}  // namespace rppg::pad
