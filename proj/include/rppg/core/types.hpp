#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rppg/errors.hpp"

namespace rppg::core {

// Per-window channel means r(t), g(t), b(t) at sampling rate fs.
struct RgbTrace {
  std::vector<double> r;
  std::vector<double> g;
  std::vector<double> b;
  double fs = 0.0;

  std::size_t size() const { return g.size(); }
};

// The two projection planes S1(t), S2(t) the pulse signal is combined from.
struct PosPlanes {
  std::vector<double> s1;
  std::vector<double> s2;
};

struct RppgSignal {
  std::vector<double> samples;
  double fs = 0.0;

  std::size_t size() const { return samples.size(); }
};

// One-sided magnitude spectrum M(k), k = 0 .. n_fft/2.
struct Spectrum {
  std::vector<double> magnitudes;
  double delta_f = 0.0;
  std::size_t n_fft = 0;
  double fs = 0.0;
};

struct AnalysisConfig {
  double t_win = 10.0;          // sliding window length, s
  double t_step = 1.0;          // window step, s
  double f1 = 0.6;              // heart-rate band, Hz
  double f2 = 4.0;
  double hr_tolerance = 0.05;   // half-width of the SNR signal mask, Hz
  double pi_cutoff = 20.0;      // perfusion-index low-pass cutoff, Hz
  int filter_order = 5;
  double min_delta_f = 1.0 / 60.0;  // spectral resolution bound, Hz

  void validate() const {
    if (!(f1 > 0.0) || !(f2 > f1))
      fail(Errc::BadConfig, "core.config", "need 0 < f1 < f2");
    if (!(t_step > 0.0) || !(t_win > 0.0) || t_step > t_win)
      fail(Errc::BadConfig, "core.config", "need 0 < t_step <= t_win");
    if (!(hr_tolerance > 0.0))
      fail(Errc::BadConfig, "core.config", "hr_tolerance must be positive");
    if (!(pi_cutoff > 0.0))
      fail(Errc::BadConfig, "core.config", "pi_cutoff must be positive");
    if (filter_order < 1 || filter_order > 16)
      fail(Errc::BadConfig, "core.config", "filter_order out of range");
    if (!(min_delta_f > 0.0))
      fail(Errc::BadConfig, "core.config", "min_delta_f must be positive");
  }
};

// SNR decomposition of one spectrum at a given f_hr. `mask` marks the bins
// counted as signal (within hr_tolerance of f_hr or of its second harmonic);
// the powers sum over the in-band [f1, f2] bins only.
struct SnrBreakdown {
  double snr_db = 0.0;
  double signal_power = 0.0;
  double noise_power = 0.0;
  std::vector<std::uint8_t> mask;
};

struct WindowMetrics {
  double t_start = 0.0;  // s
  double f_hr = 0.0;     // Hz
  double bpm = 0.0;      // 60 * f_hr
  double snr_db = 0.0;
  double magnitude = 0.0;  // M(f_hr)
  double pi = 0.0;
  std::optional<double> rho_ref;
};

}  // namespace rppg::core
