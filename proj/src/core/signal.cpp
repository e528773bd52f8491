#include "rppg/core/signal.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "rppg/core/butterworth.hpp"
#include "rppg/core/fft.hpp"

namespace rppg::core {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(std::span<const double> v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

void validate_trace(const RgbTrace& t, const char* where) {
  if (t.r.size() != t.g.size() || t.g.size() != t.b.size())
    fail(Errc::LengthMismatch, where, "channel lengths differ");
  if (t.size() < 2) fail(Errc::TooShort, where, "need at least 2 samples");
  if (!(t.fs > 0.0)) fail(Errc::BadConfig, where, "fs must be positive");
}

}  // namespace

RgbTrace normalize_trace(const RgbTrace& raw) {
  validate_trace(raw, "core.normalize_trace");
  RgbTrace out;
  out.fs = raw.fs;
  const std::vector<double>* in[3] = {&raw.r, &raw.g, &raw.b};
  std::vector<double>* dst[3] = {&out.r, &out.g, &out.b};
  for (int c = 0; c < 3; ++c) {
    const double m = mean_of(*in[c]);
    if (std::abs(m) < 1e-12)
      fail(Errc::ZeroMeanChannel, "core.normalize_trace",
           "channel mean magnitude below 1e-12");
    dst[c]->resize(in[c]->size());
    for (std::size_t i = 0; i < in[c]->size(); ++i)
      (*dst[c])[i] = (*in[c])[i] / m;
  }
  return out;
}

PosResult pos_project(const RgbTrace& trace) {
  validate_trace(trace, "core.pos_project");
  const std::size_t n = trace.size();

  PosResult res;
  res.planes.s1.resize(n);
  res.planes.s2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.planes.s1[i] = trace.g[i] - trace.b[i];
    res.planes.s2[i] = trace.g[i] + trace.b[i] - 2.0 * trace.r[i];
  }

  const double sigma1 = stddev_of(res.planes.s1);
  const double sigma2 = stddev_of(res.planes.s2);

  res.h.fs = trace.fs;
  res.h.samples.resize(n);
  if (sigma2 < 1e-12) {
    res.degenerate_variance = true;
    res.h.samples = res.planes.s1;
  } else {
    const double ratio = sigma1 / sigma2;
    for (std::size_t i = 0; i < n; ++i)
      res.h.samples[i] = res.planes.s1[i] + ratio * res.planes.s2[i];
  }

  const double m = mean_of(res.h.samples);
  for (double& v : res.h.samples) v -= m;
  return res;
}

RppgSignal bandpass_filter(const RppgSignal& sig, const AnalysisConfig& cfg) {
  cfg.validate();
  if (!(sig.fs > 0.0))
    fail(Errc::BadConfig, "core.bandpass_filter", "fs must be positive");
  if (sig.size() <= static_cast<std::size_t>(3 * cfg.filter_order))
    fail(Errc::TooShort, "core.bandpass_filter",
         "signal length must exceed 3x filter order");

  double f2 = cfg.f2;
  if (f2 >= sig.fs / 2.0) {
    f2 = 0.8 * (sig.fs / 2.0);
    std::cerr << "core.bandpass_filter: warning: NyquistViolation, f2 clamped to "
              << f2 << " Hz\n";
  }
  if (!(cfg.f1 < f2))
    fail(Errc::BadConfig, "core.bandpass_filter",
         "band collapsed after Nyquist clamp");

  const SosFilter f =
      SosFilter::butter_bandpass(cfg.filter_order, cfg.f1, f2, sig.fs);
  RppgSignal out;
  out.fs = sig.fs;
  out.samples = f.filtfilt(sig.samples);
  return out;
}

Spectrum magnitude_spectrum(const RppgSignal& sig, const AnalysisConfig& cfg) {
  cfg.validate();
  const std::size_t n = sig.size();
  if (n < 2) fail(Errc::TooShort, "core.magnitude_spectrum", "need >= 2 samples");
  if (!(sig.fs > 0.0))
    fail(Errc::BadConfig, "core.magnitude_spectrum", "fs must be positive");

  const auto min_bins =
      static_cast<std::size_t>(std::ceil(sig.fs / cfg.min_delta_f));
  const std::size_t n_fft = std::max(next_pow2(n), next_pow2(min_bins));

  std::vector<std::complex<double>> buf(n_fft, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    const double w =
        0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                             static_cast<double>(n - 1));
    buf[i] = sig.samples[i] * w;
  }
  fft(buf);

  Spectrum spec;
  spec.fs = sig.fs;
  spec.n_fft = n_fft;
  spec.delta_f = sig.fs / static_cast<double>(n_fft);
  spec.magnitudes.resize(n_fft / 2 + 1);
  for (std::size_t k = 0; k <= n_fft / 2; ++k)
    spec.magnitudes[k] = std::abs(buf[k]);
  return spec;
}

double estimate_hr(const Spectrum& spec, const AnalysisConfig& cfg) {
  cfg.validate();
  if (spec.magnitudes.empty() || !(spec.delta_f > 0.0))
    fail(Errc::BadConfig, "core.estimate_hr", "empty spectrum");

  const double df = spec.delta_f;
  const double eps = 1e-9;
  auto k_lo = static_cast<std::size_t>(std::ceil((cfg.f1 - eps) / df));
  auto k_hi = static_cast<std::size_t>(std::floor((cfg.f2 + eps) / df));
  k_hi = std::min(k_hi, spec.magnitudes.size() - 1);
  if (k_lo > k_hi)
    fail(Errc::EmptyBand, "core.estimate_hr", "no spectrum bins inside [f1, f2]");

  // A candidate must carry a real fundamental of its own. Without this
  // floor, a bin at half the frequency of the strongest peak inherits that
  // peak through the harmonic term and wins on leakage or noise alone (for
  // example a half-frequency proxy of a tone that itself lies outside the
  // band). 5% of the strongest in-band magnitude is far above leakage
  // levels yet far below any plausible pulse fundamental.
  double band_max = 0.0;
  for (std::size_t k = k_lo; k <= k_hi; ++k)
    band_max = std::max(band_max, spec.magnitudes[k]);
  const double floor_mag = 0.05 * band_max;

  std::size_t best_k = k_lo;
  double best_score = -1.0;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    if (spec.magnitudes[k] < floor_mag) continue;
    double score = spec.magnitudes[k];
    // The second harmonic joins the objective as long as it is physically
    // representable, i.e. at or below Nyquist.
    if (2 * k < spec.magnitudes.size()) score += spec.magnitudes[2 * k];
    if (score > best_score) {
      best_score = score;
      best_k = k;
    }
  }
  return static_cast<double>(best_k) * df;
}

SnrMagnitude snr_and_magnitude(const Spectrum& spec, double f_hr,
                               const AnalysisConfig& cfg) {
  cfg.validate();
  const double eps = 1e-9;
  if (f_hr < cfg.f1 - eps || f_hr > cfg.f2 + eps)
    fail(Errc::OutOfBand, "core.snr_and_magnitude", "f_hr outside [f1, f2]");
  if (spec.magnitudes.empty() || !(spec.delta_f > 0.0))
    fail(Errc::BadConfig, "core.snr_and_magnitude", "empty spectrum");

  const double df = spec.delta_f;
  SnrMagnitude out;
  out.snr.mask.assign(spec.magnitudes.size(), 0);

  double signal = 0.0;
  double noise = 0.0;
  for (std::size_t k = 0; k < spec.magnitudes.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    const bool masked = std::abs(f_hr - f) <= cfg.hr_tolerance + eps ||
                        std::abs(2.0 * f_hr - f) <= cfg.hr_tolerance + eps;
    out.snr.mask[k] = masked ? 1 : 0;
    if (f < cfg.f1 - eps || f > cfg.f2 + eps) continue;
    const double p = spec.magnitudes[k] * spec.magnitudes[k];
    if (masked)
      signal += p;
    else
      noise += p;
  }

  out.snr.signal_power = signal;
  out.snr.noise_power = noise;
  constexpr double floor_ratio = 1e-12;
  if (!(signal > 0.0)) {
    out.snr.snr_db = -120.0;
  } else if (noise < floor_ratio * signal) {
    out.snr.snr_db = 120.0;
  } else {
    out.snr.snr_db = 10.0 * std::log10(signal / noise);
  }

  const auto k_hr = static_cast<std::size_t>(std::llround(f_hr / df));
  out.magnitude = spec.magnitudes[std::min(k_hr, spec.magnitudes.size() - 1)];
  return out;
}

double perfusion_index(std::span<const double> green, double fs,
                       const AnalysisConfig& cfg) {
  cfg.validate();
  if (green.size() < 2)
    fail(Errc::TooShort, "core.perfusion_index", "need >= 2 samples");
  if (!(fs > 0.0))
    fail(Errc::BadConfig, "core.perfusion_index", "fs must be positive");

  const auto [mn, mx] = std::minmax_element(green.begin(), green.end());
  if (*mn == *mx) {
    // Constant input: the low-pass is an identity here, so PI is exactly 1.
    if (!(*mn > 0.0))
      fail(Errc::NonPositiveMean, "core.perfusion_index",
           "low-passed green mean must be positive");
    return 1.0;
  }

  const double f_cut = std::min(cfg.pi_cutoff, 0.8 * fs / 2.0);
  const SosFilter lp = SosFilter::butter_lowpass(cfg.filter_order, f_cut, fs);
  const std::vector<double> g_lp = lp.filtfilt(green);

  const double m = mean_of(g_lp);
  if (!(m > 0.0))
    fail(Errc::NonPositiveMean, "core.perfusion_index",
         "low-passed green mean must be positive");
  return *std::max_element(g_lp.begin(), g_lp.end()) / m;
}

double pearson_corr(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    fail(Errc::LengthMismatch, "core.pearson_corr", "input lengths differ");
  const std::size_t n = a.size();
  if (n < 2) fail(Errc::ZeroVariance, "core.pearson_corr", "need >= 2 samples");

  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0))
    fail(Errc::ZeroVariance, "core.pearson_corr", "an input has zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double pearson_corr(const RppgSignal& a, const RppgSignal& b) {
  return pearson_corr(std::span<const double>(a.samples),
                      std::span<const double>(b.samples));
}

RppgSignal reference_from_hr(double f_hr, double fs, double duration) {
  if (!(fs > 0.0))
    fail(Errc::BadConfig, "core.reference_from_hr", "fs must be positive");
  if (!(f_hr > 0.0) || f_hr >= fs / 2.0)
    fail(Errc::NyquistViolation, "core.reference_from_hr",
         "need 0 < f_hr < fs/2");
  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  if (n < 2) fail(Errc::TooShort, "core.reference_from_hr", "duration too small");

  RppgSignal out;
  out.fs = fs;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.samples[i] =
        std::sin(2.0 * M_PI * f_hr * static_cast<double>(i) / fs);
  return out;
}

double quadrature_corr(const RppgSignal& x, double f_hr) {
  const std::size_t n = x.size();
  if (n < 3) return 0.0;
  if (!(x.fs > 0.0) || !(f_hr > 0.0) || f_hr >= x.fs / 2.0) return 0.0;

  std::vector<double> s(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = 2.0 * M_PI * f_hr * static_cast<double>(i) / x.fs;
    s[i] = std::sin(ph);
    c[i] = std::cos(ph);
  }
  const double mx = mean_of(x.samples);
  const double ms = mean_of(s);
  const double mc = mean_of(c);

  double xx = 0.0, ss = 0.0, cc = 0.0, sc = 0.0, xs = 0.0, xc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x.samples[i] - mx;
    const double ds = s[i] - ms;
    const double dc = c[i] - mc;
    xx += dx * dx;
    ss += ds * ds;
    cc += dc * dc;
    sc += ds * dc;
    xs += dx * ds;
    xc += dx * dc;
  }
  if (!(xx > 0.0)) return 0.0;

  const double det = ss * cc - sc * sc;
  double proj2;
  if (det <= 1e-12 * ss * cc || !(ss > 0.0) || !(cc > 0.0)) {
    // Sine and cosine nearly collinear after centering; fit the sine only.
    proj2 = ss > 0.0 ? xs * xs / ss : 0.0;
  } else {
    proj2 = (cc * xs * xs - 2.0 * sc * xs * xc + ss * xc * xc) / det;
  }
  return std::clamp(std::sqrt(std::max(0.0, proj2) / xx), 0.0, 1.0);
}

}  // namespace rppg::core
