#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rppg/video/image.hpp"

namespace rppg::synth {

struct DeadZone {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

// Recipe for a synthetic pulsatile video. The pulse modulates the base color
// along pulse_direction; amplitudes and noise are relative to the base green
// level so specs stay meaningful across base colors.
struct SynthSpec {
  int width = 100;
  int height = 100;
  double fs = 30.0;
  double duration = 10.0;                          // s
  std::array<std::uint8_t, 3> base_color = {180, 130, 110};
  double pulse_hr = 72.0;                          // BPM
  double pulse_amplitude = 0.02;                   // fraction of base green
  std::array<double, 3> pulse_direction = {0.4286, 1.0, 0.6883};
  double noise_sigma = 0.0;                        // fraction of base green
  std::vector<DeadZone> dead_zones;                // non-pulsatile rectangles
  std::optional<double> reperfusion_time;          // s; amplitude 0 before
  double phase_gradient = 0.0;                     // radians per pixel along x
  std::uint64_t seed = 1;

  void validate() const;  // throws InvalidSpec
};

// Parses a spec from JSON text / a JSON file. Unknown keys are rejected so a
// misspelled field cannot silently fall back to its default.
SynthSpec parse_synth_spec(const std::string& json_text);
SynthSpec load_synth_spec(const std::string& path);

struct SynthResult {
  video::FrameSequence video;
  double hr_bpm = 0.0;
  std::vector<double> waveform;       // gated unit pulse, one value per frame
  std::vector<double> amplitude_map;  // width*height static spatial amplitude
};

// Renders the video. Frames may be generated in parallel; each frame draws
// from its own seed-derived random substream, so the output is bit-identical
// for a given seed regardless of the thread count.
SynthResult generate_synthetic_video(const SynthSpec& spec, int threads = 1);

// Writes frames in the standard frame-directory layout plus truth.json,
// waveform.csv and amplitude_map.bin next to them.
void write_synth_output(const SynthResult& result, const std::string& dir,
                        const std::string& image_ext = "png");

}  // namespace rppg::synth
