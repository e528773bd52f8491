#pragma once

#include <span>

#include "rppg/core/types.hpp"

namespace rppg::core {

// Divides each channel by its temporal mean, making the trace dimensionless
// and invariant to common intensity scaling.
RgbTrace normalize_trace(const RgbTrace& raw);

struct PosResult {
  RppgSignal h;          // mean-subtracted pulse signal
  PosPlanes planes;      // s1 = g - b, s2 = g + b - 2r
  bool degenerate_variance = false;  // sigma(s2) vanished; h fell back to s1
};

// Projects a normalized trace onto the plane orthogonal to the skin tone:
// h = s1 + (sigma(s1)/sigma(s2)) * s2, then subtracts the mean of h.
PosResult pos_project(const RgbTrace& trace);

// Zero-phase Butterworth band-pass over [cfg.f1, cfg.f2]. A band edge at or
// above Nyquist is clamped to 0.8 * fs/2 with a warning on stderr.
RppgSignal bandpass_filter(const RppgSignal& sig, const AnalysisConfig& cfg);

// Hann-windowed, zero-padded magnitude spectrum. n_fft is the smallest power
// of two that is >= the signal length and gives fs/n_fft <= cfg.min_delta_f.
Spectrum magnitude_spectrum(const RppgSignal& sig, const AnalysisConfig& cfg);

// Heart-rate frequency: the in-band bin maximizing M(f) + M(2f), where the
// harmonic term only counts while 2f stays inside the band; ties resolve to
// the lower frequency.
double estimate_hr(const Spectrum& spec, const AnalysisConfig& cfg);

struct SnrMagnitude {
  SnrBreakdown snr;
  double magnitude = 0.0;  // M at the f_hr bin
};

// SNR in dB over the in-band bins: signal = bins within cfg.hr_tolerance of
// f_hr or 2*f_hr, noise = the rest. Noise power is floored at 1e-12 of the
// signal power, capping the result at +120 dB on noiseless input.
SnrMagnitude snr_and_magnitude(const Spectrum& spec, double f_hr,
                               const AnalysisConfig& cfg);

// PI = max(g_lp) / mean(g_lp) of the raw green trace after a low-pass at
// f_cut = min(cfg.pi_cutoff, 0.8 * fs/2).
double perfusion_index(std::span<const double> green, double fs,
                       const AnalysisConfig& cfg);

double pearson_corr(std::span<const double> a, std::span<const double> b);
double pearson_corr(const RppgSignal& a, const RppgSignal& b);

// Unit sine at f_hr, phase 0, round(duration * fs) samples.
RppgSignal reference_from_hr(double f_hr, double fs, double duration);

// Correlation of x against the best phase shift of a sine at f_hr, in [0,1].
// Used when the reference is an external heart rate: an imitated sine has no
// meaningful phase relation to the video, so the phase is fitted.
double quadrature_corr(const RppgSignal& x, double f_hr);

}  // namespace rppg::core
