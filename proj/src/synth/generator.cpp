#include "rppg/synth/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "rppg/errors.hpp"
#include "rppg/scales/io.hpp"
#include "rppg/util/parallel.hpp"
#include "rppg/video/io.hpp"

namespace rppg::synth {
namespace {

constexpr const char* kWhere = "synth.generate";

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// SplitMix64 stream. Every frame gets an independent stream derived from the
// spec seed and the frame index, which is what makes parallel generation
// deterministic: the draw sequence inside a frame is fixed raster order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double gaussian() {  // Box-Muller, no state beyond the two uniforms
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::uint64_t state_;
};

std::uint64_t frame_seed(std::uint64_t seed, std::size_t frame_index) {
  return mix64(seed + 0x9e3779b97f4a7c15ULL * (frame_index + 1));
}

std::uint8_t quantize(double v) {
  const long r = std::lround(v);
  return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

void check(bool ok, const char* what) {
  if (!ok) fail(Errc::InvalidSpec, kWhere, what);
}

}  // namespace

void SynthSpec::validate() const {
  check(width >= 1 && height >= 1, "frame dimensions must be at least 1x1");
  check(fs > 0.0, "fs must be positive");
  check(duration > 0.0, "duration must be positive");
  check(pulse_hr >= 36.0 && pulse_hr <= 240.0,
        "pulse_hr must lie in [36, 240] BPM");
  check(fs > 2.0 * pulse_hr / 60.0, "fs must exceed twice the pulse rate");
  check(pulse_amplitude >= 0.0 && pulse_amplitude < 0.5,
        "pulse_amplitude must lie in [0, 0.5)");
  check(noise_sigma >= 0.0, "noise_sigma must be non-negative");
  for (std::uint8_t c : base_color)
    check(c >= 1, "base_color channels must be at least 1");
  for (double d : pulse_direction)
    check(std::isfinite(d), "pulse_direction must be finite");
  check(std::isfinite(phase_gradient), "phase_gradient must be finite");
  if (reperfusion_time)
    check(std::isfinite(*reperfusion_time) && *reperfusion_time >= 0.0,
          "reperfusion_time must be non-negative");
  for (const DeadZone& z : dead_zones)
    check(z.w >= 0 && z.h >= 0, "dead zone extents must be non-negative");
  check(std::lround(duration * fs) >= 1, "spec yields zero frames");
}

SynthSpec parse_synth_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidSpec, kWhere, std::string("spec is not valid JSON: ") +
                                        e.what());
  }
  if (!j.is_object()) fail(Errc::InvalidSpec, kWhere, "spec must be an object");

  SynthSpec spec;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "width") {
        spec.width = value.get<int>();
      } else if (key == "height") {
        spec.height = value.get<int>();
      } else if (key == "fs") {
        spec.fs = value.get<double>();
      } else if (key == "duration") {
        spec.duration = value.get<double>();
      } else if (key == "base_color") {
        auto v = value.get<std::vector<int>>();
        if (v.size() != 3 ||
            std::any_of(v.begin(), v.end(),
                        [](int c) { return c < 0 || c > 255; }))
          fail(Errc::InvalidSpec, kWhere, "base_color must be three bytes");
        for (int i = 0; i < 3; ++i)
          spec.base_color[i] = static_cast<std::uint8_t>(v[i]);
      } else if (key == "pulse_hr") {
        spec.pulse_hr = value.get<double>();
      } else if (key == "pulse_amplitude") {
        spec.pulse_amplitude = value.get<double>();
      } else if (key == "pulse_direction") {
        auto v = value.get<std::vector<double>>();
        if (v.size() != 3)
          fail(Errc::InvalidSpec, kWhere,
               "pulse_direction must have three components");
        for (int i = 0; i < 3; ++i) spec.pulse_direction[i] = v[i];
      } else if (key == "noise_sigma") {
        spec.noise_sigma = value.get<double>();
      } else if (key == "dead_zones") {
        for (const auto& zj : value) {
          DeadZone z;
          z.x = zj.at("x").get<int>();
          z.y = zj.at("y").get<int>();
          z.w = zj.at("w").get<int>();
          z.h = zj.at("h").get<int>();
          spec.dead_zones.push_back(z);
        }
      } else if (key == "reperfusion_time") {
        if (!value.is_null()) spec.reperfusion_time = value.get<double>();
      } else if (key == "phase_gradient") {
        spec.phase_gradient = value.get<double>();
      } else if (key == "seed") {
        spec.seed = value.get<std::uint64_t>();
      } else {
        fail(Errc::InvalidSpec, kWhere, "unknown spec key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidSpec, kWhere, std::string("bad spec value: ") + e.what());
  }
  spec.validate();
  return spec;
}

SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "synth.load_spec", "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_synth_spec(text);
}

SynthResult generate_synthetic_video(const SynthSpec& spec, int threads) {
  spec.validate();

  const std::size_t n_frames =
      static_cast<std::size_t>(std::lround(spec.duration * spec.fs));
  const std::size_t n_px =
      static_cast<std::size_t>(spec.width) * spec.height;
  const double omega = 2.0 * 3.14159265358979323846 * spec.pulse_hr / 60.0;
  const double base_g = static_cast<double>(spec.base_color[1]);
  const double sigma_abs = spec.noise_sigma * base_g;
  // Without dithering, amplitudes of a percent or two of one 8-bit level
  // would round away entirely. A constant (pulse-free, noise-free) spec skips
  // it so the frames stay bit-exact equal to the base color.
  const bool dither = spec.pulse_amplitude > 0.0 || spec.noise_sigma > 0.0;

  SynthResult out;
  out.hr_bpm = spec.pulse_hr;

  // Static spatial amplitude: zero inside dead zones.
  out.amplitude_map.assign(n_px, spec.pulse_amplitude);
  for (const DeadZone& z : spec.dead_zones) {
    const int x0 = std::clamp(z.x, 0, spec.width);
    const int y0 = std::clamp(z.y, 0, spec.height);
    const int x1 = std::clamp(z.x + z.w, 0, spec.width);
    const int y1 = std::clamp(z.y + z.h, 0, spec.height);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        out.amplitude_map[static_cast<std::size_t>(y) * spec.width + x] = 0.0;
  }

  out.waveform.resize(n_frames);
  out.video.width = spec.width;
  out.video.height = spec.height;
  out.video.fs = spec.fs;
  out.video.frames.resize(n_frames);

  const double base[3] = {static_cast<double>(spec.base_color[0]), base_g,
                          static_cast<double>(spec.base_color[2])};
  util::parallel_for(n_frames, threads, [&](std::size_t idx) {
    const double t = static_cast<double>(idx) / spec.fs;
    const double gate =
        (!spec.reperfusion_time || t >= *spec.reperfusion_time) ? 1.0 : 0.0;
    out.waveform[idx] = gate * std::sin(omega * t);

    Rng rng(frame_seed(spec.seed, idx));
    video::Image& frame = out.video.frames[idx];
    frame.width = spec.width;
    frame.height = spec.height;
    frame.data.resize(n_px * 3);
    std::uint8_t* dst = frame.data.data();
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * spec.width + x;
        const double a = out.amplitude_map[p] * gate;
        const double pulse =
            a * std::sin(omega * t + spec.phase_gradient * x);
        for (int c = 0; c < 3; ++c) {
          double v = base[c] * (1.0 + pulse * spec.pulse_direction[c]);
          if (sigma_abs > 0.0) v += sigma_abs * rng.gaussian();
          if (dither) v += rng.uniform() + rng.uniform() - 1.0;
          *dst++ = quantize(v);
        }
      }
    }
  });
  return out;
}

void write_synth_output(const SynthResult& result, const std::string& dir,
                        const std::string& image_ext) {
  video::write_frame_dir(result.video, dir, image_ext);

  {
    std::ofstream csv(dir + "/waveform.csv", std::ios::binary);
    if (!csv)
      fail(Errc::IoFailure, "synth.write", "cannot write waveform.csv");
    csv << "t,value\n";
    char line[64];
    for (std::size_t i = 0; i < result.waveform.size(); ++i) {
      std::snprintf(line, sizeof line, "%.10g,%.10g\n",
                    static_cast<double>(i) / result.video.fs,
                    result.waveform[i]);
      csv << line;
    }
  }

  scales::MapMatrix amp;
  amp.width = result.video.width;
  amp.height = result.video.height;
  amp.metric = "amplitude";
  amp.values = result.amplitude_map;
  scales::write_map_file(amp, dir + "/amplitude_map.bin");

  nlohmann::json truth;
  truth["hr_bpm"] = result.hr_bpm;
  truth["waveform_csv"] = "waveform.csv";
  truth["amplitude_map"] = "amplitude_map.bin";
  truth["frames"] = result.video.frames.size();
  truth["fs"] = result.video.fs;
  std::ofstream tj(dir + "/truth.json", std::ios::binary);
  if (!tj) fail(Errc::IoFailure, "synth.write", "cannot write truth.json");
  tj << truth.dump(2) << "\n";
}

}  // namespace rppg::synth
