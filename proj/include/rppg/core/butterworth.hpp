#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rppg::core {

// One second-order section, denominator normalized (a0 = 1).
struct Biquad {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

// Butterworth filter as cascaded biquads, applied forward-backward for zero
// phase. Designed via the analog prototype + bilinear transform with
// frequency prewarping; each section is gain-normalized so the cascade has
// unit gain at the band center (band-pass) or at DC (low-pass).
class SosFilter {
 public:
  static SosFilter butter_bandpass(int order, double f1, double f2, double fs);
  static SosFilter butter_lowpass(int order, double fc, double fs);

  // Zero-phase filtering with odd-reflection padding and steady-state
  // initial conditions; output length equals input length.
  std::vector<double> filtfilt(std::span<const double> x) const;

  // Single forward pass (used by filtfilt; exposed for diagnostics).
  std::vector<double> filter(std::span<const double> x) const;

  // Frequency response of the cascade at normalized frequency omega (rad).
  std::complex<double> response(double omega) const;

  const std::vector<Biquad>& sections() const { return sections_; }

 private:
  std::vector<Biquad> sections_;
};

}  // namespace rppg::core
