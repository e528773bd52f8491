#pragma once

// Shared fixtures and reference implementations for the unit tests.
//
// The reference code here is intentionally written from first principles
// (textbook DFT sum, closed-form analog filter magnitude, ray-casting
// point-in-polygon) so library results are checked against independent
// math rather than against the code under test.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "rppg/video/image.hpp"

namespace testutil {

// O(n^2) discrete Fourier transform, straight from the definition.
inline std::vector<std::complex<double>> naive_dft(
    const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi *
                         static_cast<double>(k) * static_cast<double>(t) /
                         static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

// Squared magnitude of an order-N analog Butterworth band-pass prototype,
// evaluated with the same tan() prewarp the bilinear design uses. Because
// the bilinear transform maps the analog response exactly onto the digital
// frequency axis, this is a closed-form oracle for the digital filter's
// magnitude at frequency f (Hz) given sampling rate fs.
inline double butter_bandpass_mag2(int order, double f1, double f2, double fs,
                                   double f) {
  auto warp = [&](double fr) {
    return 2.0 * fs * std::tan(std::numbers::pi * fr / fs);
  };
  const double w1 = warp(f1);
  const double w2 = warp(f2);
  const double w = warp(f);
  const double w0sq = w1 * w2;
  const double bw = w2 - w1;
  const double r = (w * w - w0sq) / (bw * w);
  return 1.0 / (1.0 + std::pow(r * r, order));
}

// Same idea for the low-pass prototype: |H(jw)|^2 = 1 / (1 + (w/wc)^2N).
inline double butter_lowpass_mag2(int order, double fc, double fs, double f) {
  auto warp = [&](double fr) {
    return 2.0 * fs * std::tan(std::numbers::pi * fr / fs);
  };
  const double r = warp(f) / warp(fc);
  return 1.0 / (1.0 + std::pow(r * r, order));
}

// Exhaustive scan of the documented heart-rate objective: over every bin
// whose frequency lies in [f1, f2], score magnitude plus the second-harmonic
// magnitude whenever that harmonic bin is representable (at or below
// Nyquist, i.e. inside the one-sided spectrum). Ties resolve to the
// lowest-frequency bin (strict > while ascending).
inline std::size_t brute_force_hr_bin(const std::vector<double>& mag,
                                      double df, double f1, double f2) {
  const double eps = 1e-9;
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    if (f < f1 - eps || f > f2 + eps) continue;
    double score = mag[k];
    if (2 * k < mag.size()) score += mag[2 * k];
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

struct Ycbcr {
  double y = 0.0;
  double cb = 0.0;
  double cr = 0.0;
};

// Full-range BT.601 RGB -> YCbCr, the standard coefficient matrix.
inline Ycbcr bt601(double r, double g, double b) {
  Ycbcr out;
  out.y = 0.299 * r + 0.587 * g + 0.114 * b;
  out.cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
  out.cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
  return out;
}

// Even-odd (ray casting) point-in-polygon test at an arbitrary real point.
inline bool point_in_polygon(double px, double py,
                             const std::vector<rppg::video::Point>& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = poly[i].x, yi = poly[i].y;
    const double xj = poly[j].x, yj = poly[j].y;
    const bool crosses = (yi > py) != (yj > py);
    if (crosses && px < (xj - xi) * (py - yi) / (yj - yi) + xi)
      inside = !inside;
  }
  return inside;
}

// Deterministic RNG for building noisy test signals. SplitMix64 core with
// a Box-Muller gaussian; self-contained so tests do not lean on the
// library's own random machinery.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double gauss() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

// Fresh scratch directory under the system temp root. Removes any leftover
// from a previous run of the same tag so reruns start clean.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / "rppg_tests" / tag;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Synthetic 68-point face in a 100x100 frame, iBUG ordering. Geometry is
// hand-placed: an elliptical jaw, straight brows, vertical nose bridge and
// a flat nose base, so region polygons come out simple and well-separated.
inline rppg::video::LandmarkSet make_face_landmarks() {
  rppg::video::LandmarkSet lm;
  lm.points.resize(68);
  // Jaw 0..16, left ear to right ear over the lower half of an ellipse.
  for (int i = 0; i <= 16; ++i) {
    const double t = static_cast<double>(i) * std::numbers::pi / 16.0;
    lm.points[static_cast<std::size_t>(i)] = {50.0 - 30.0 * std::cos(t),
                                              45.0 + 43.0 * std::sin(t)};
  }
  const double rest[][2] = {
      // Brows 17..26.
      {25, 40}, {29, 38}, {33, 37}, {37, 37}, {41, 38},
      {59, 38}, {63, 37}, {67, 37}, {71, 38}, {75, 40},
      // Nose bridge 27..30 and base 31..35.
      {50, 42}, {50, 48}, {50, 54}, {50, 60},
      {44, 64}, {47, 65}, {50, 66}, {53, 65}, {56, 64},
      // Eyes 36..47.
      {30, 45}, {34, 43}, {38, 43}, {41, 45}, {38, 47}, {34, 47},
      {59, 45}, {62, 43}, {66, 43}, {70, 45}, {66, 47}, {62, 47},
      // Mouth outer 48..59 and inner 60..67.
      {38, 74}, {42, 72}, {46, 71}, {50, 71}, {54, 71}, {58, 72},
      {62, 74}, {58, 78}, {54, 80}, {50, 80}, {46, 80}, {42, 78},
      {41, 74}, {46, 73}, {50, 73}, {54, 73}, {59, 74},
      {54, 76}, {50, 76}, {46, 76},
  };
  for (std::size_t i = 0; i < 51; ++i)
    lm.points[17 + i] = {rest[i][0], rest[i][1]};
  return lm;
}

}  // namespace testutil
