#include "rppg/scales/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "rppg/core/signal.hpp"
#include "rppg/errors.hpp"
#include "rppg/pad/features.hpp"
#include "rppg/scales/regions.hpp"
#include "rppg/util/parallel.hpp"
#include "rppg/video/ops.hpp"

namespace rppg::scales {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Channel means over one mask, one sample per frame.
core::RgbTrace trace_over_mask(const video::FrameSequence& seq,
                               const video::RoiMask& mask) {
  core::RgbTrace t;
  t.fs = seq.fs;
  t.r.reserve(seq.size());
  t.g.reserve(seq.size());
  t.b.reserve(seq.size());
  for (const auto& frame : seq.frames) {
    video::Rgb m = video::mean_rgb_over_mask(frame, mask);
    t.r.push_back(m.r);
    t.g.push_back(m.g);
    t.b.push_back(m.b);
  }
  return t;
}

core::RgbTrace slice_trace(const core::RgbTrace& t, std::size_t start,
                           std::size_t count) {
  core::RgbTrace w;
  w.fs = t.fs;
  w.r.assign(t.r.begin() + start, t.r.begin() + start + count);
  w.g.assign(t.g.begin() + start, t.g.begin() + start + count);
  w.b.assign(t.b.begin() + start, t.b.begin() + start + count);
  return w;
}

struct ChainOutput {
  core::WindowMetrics metrics;  // rho_ref left unset
  core::RppgSignal filtered;
};

// The full single-window pipeline shared by every analysis scale.
ChainOutput run_window_chain(const core::RgbTrace& window, double t_start,
                             const core::AnalysisConfig& cfg) {
  ChainOutput out;
  core::RgbTrace norm = core::normalize_trace(window);
  core::PosResult pos = core::pos_project(norm);
  out.filtered = core::bandpass_filter(pos.h, cfg);
  core::Spectrum spec = core::magnitude_spectrum(out.filtered, cfg);
  const double f_hr = core::estimate_hr(spec, cfg);
  core::SnrMagnitude sm = core::snr_and_magnitude(spec, f_hr, cfg);
  out.metrics.t_start = t_start;
  out.metrics.f_hr = f_hr;
  out.metrics.bpm = 60.0 * f_hr;
  out.metrics.snr_db = sm.snr.snr_db;
  out.metrics.magnitude = sm.magnitude;
  out.metrics.pi = core::perfusion_index(window.g, window.fs, cfg);
  return out;
}

// Pearson correlation, treating a zero-variance side as "no correlation"
// rather than an error: a window whose pulse signal is flat carries no
// evidence either way, and failing the whole run on it would make otherwise
// valid recordings (e.g. pre-reperfusion stretches) unanalyzable.
double safe_corr(const core::RppgSignal& a, const core::RppgSignal& b) {
  try {
    return core::pearson_corr(a, b);
  } catch (const Error& e) {
    if (e.code() == Errc::ZeroVariance) return 0.0;
    throw;
  }
}

video::RoiMask intersect(const video::RoiMask& a, const video::RoiMask& b) {
  video::RoiMask out = a;
  for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] &= b.bits[i];
  return out;
}

// Aligns every frame to frame 0 by phase correlation over `search`.
video::FrameSequence registered_copy(const video::FrameSequence& seq,
                                     const video::RoiMask& search,
                                     int threads) {
  video::FrameSequence out;
  out.width = seq.width;
  out.height = seq.height;
  out.fs = seq.fs;
  out.frames.resize(seq.frames.size());
  out.frames[0] = seq.frames[0];
  util::parallel_for(seq.frames.size() - 1, threads, [&](std::size_t i) {
    const video::Image& frame = seq.frames[i + 1];
    video::Shift s = video::register_translation(seq.frames[0], frame, search);
    out.frames[i + 1] = video::translate_clamp(frame, s.dx, s.dy);
  });
  return out;
}

std::size_t window_samples(double fs, const core::AnalysisConfig& cfg) {
  return static_cast<std::size_t>(std::lround(cfg.t_win * fs));
}

}  // namespace

std::vector<std::size_t> window_starts(std::size_t n_samples, double fs,
                                       const core::AnalysisConfig& cfg) {
  cfg.validate();
  if (!(fs > 0.0))
    fail(Errc::BadConfig, "scales.windows", "sampling rate must be positive");
  const std::size_t win = window_samples(fs, cfg);
  const std::size_t step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(cfg.t_step * fs)));
  std::vector<std::size_t> starts;
  if (win == 0) return starts;
  for (std::size_t s = 0; s + win <= n_samples; s += step) starts.push_back(s);
  return starts;
}

GlobalResult analyze_global(const video::FrameSequence& seq,
                            const video::RoiMask& roi,
                            const video::RoiMask* ref,
                            const core::AnalysisConfig& cfg,
                            std::optional<double> external_hr,
                            const PipelineOptions& opt) {
  cfg.validate();
  const char* where = "scales.global";
  if (seq.frames.empty()) fail(Errc::TooShortRecording, where, "no frames");
  if (roi.width != seq.width || roi.height != seq.height)
    fail(Errc::DimensionMismatch, where, "ROI mask does not match frame size");
  if (roi.count_set() == 0)
    fail(Errc::EmptyMask, where, "ROI mask has no set pixels");
  if (ref != nullptr) {
    if (ref->width != seq.width || ref->height != seq.height)
      fail(Errc::DimensionMismatch, where,
           "reference mask does not match frame size");
    if (ref->count_set() == 0)
      fail(Errc::EmptyMask, where, "reference mask has no set pixels");
  } else if (external_hr) {
    // Validates the rate against Nyquist; the synthetic signal itself is not
    // needed because the correlation below fits the phase analytically.
    core::reference_from_hr(*external_hr, seq.fs, cfg.t_win);
  } else {
    fail(Errc::MissingReference, where,
         "need a reference mask or an external heart rate");
  }

  const video::FrameSequence* src = &seq;
  video::FrameSequence registered;
  if (opt.register_frames && seq.frames.size() > 1) {
    registered = registered_copy(seq, roi, opt.threads);
    src = &registered;
  }

  video::RoiMask roi_used = roi;
  video::RoiMask ref_used;
  if (ref != nullptr) ref_used = *ref;
  if (opt.skin_seg) {
    video::RoiMask skin = video::skin_segment(src->frames[0]);
    roi_used = intersect(roi_used, skin);
    if (roi_used.count_set() == 0)
      fail(Errc::EmptyMask, where, "ROI does not overlap detected skin");
    if (ref != nullptr) {
      ref_used = intersect(ref_used, skin);
      if (ref_used.count_set() == 0)
        fail(Errc::EmptyMask, where,
             "reference mask does not overlap detected skin");
    }
  }

  const std::vector<std::size_t> starts =
      window_starts(src->size(), src->fs, cfg);
  if (starts.empty())
    fail(Errc::TooShortRecording, where,
         "recording shorter than one analysis window");
  const std::size_t win = window_samples(src->fs, cfg);

  core::RgbTrace roi_trace = trace_over_mask(*src, roi_used);
  core::RgbTrace ref_trace;
  if (ref != nullptr) ref_trace = trace_over_mask(*src, ref_used);

  GlobalResult out;
  out.roi.fs = src->fs;
  out.roi.cfg = cfg;
  out.reference.fs = src->fs;
  out.reference.cfg = cfg;
  for (std::size_t s : starts) {
    const double t_start = static_cast<double>(s) / src->fs;
    ChainOutput roi_w = run_window_chain(slice_trace(roi_trace, s, win),
                                         t_start, cfg);
    if (ref != nullptr) {
      ChainOutput ref_w = run_window_chain(slice_trace(ref_trace, s, win),
                                           t_start, cfg);
      roi_w.metrics.rho_ref = safe_corr(roi_w.filtered, ref_w.filtered);
      ref_w.metrics.rho_ref = 1.0;  // self-correlation by definition
      out.reference.entries.push_back(ref_w.metrics);
    } else {
      roi_w.metrics.rho_ref = core::quadrature_corr(roi_w.filtered,
                                                    *external_hr);
    }
    out.roi.entries.push_back(roi_w.metrics);
  }
  return out;
}

RegionsResult analyze_regions(const video::FrameSequence& seq,
                              std::span<const video::LandmarkSet> landmarks,
                              const core::AnalysisConfig& cfg,
                              const PipelineOptions& opt) {
  cfg.validate();
  const char* where = "scales.regions";
  if (seq.frames.empty()) fail(Errc::TooShortRecording, where, "no frames");
  if (landmarks.empty() ||
      (landmarks.size() != 1 && landmarks.size() != seq.frames.size()))
    fail(Errc::BadLandmarks, where, "need one landmark set or one per frame");

  const std::vector<std::size_t> starts =
      window_starts(seq.size(), seq.fs, cfg);
  if (starts.empty())
    fail(Errc::TooShortRecording, where,
         "recording shorter than one analysis window");
  const std::size_t win = window_samples(seq.fs, cfg);

  auto masks0 = region_masks(
      regions_from_landmarks(landmarks[0], seq.width, seq.height), seq.width,
      seq.height);

  const video::FrameSequence* src = &seq;
  video::FrameSequence registered;
  if (opt.register_frames && seq.frames.size() > 1) {
    // The whole face (union of the regions) anchors the registration.
    video::RoiMask search = masks0[0];
    for (std::size_t r = 1; r < masks0.size(); ++r)
      for (std::size_t i = 0; i < search.bits.size(); ++i)
        search.bits[i] |= masks0[r].bits[i];
    registered = registered_copy(seq, search, opt.threads);
    src = &registered;
  }

  video::RoiMask skin;
  if (opt.skin_seg) skin = video::skin_segment(src->frames[0]);
  auto apply_skin = [&](std::array<video::RoiMask, 5>& ms) {
    if (!opt.skin_seg) return;
    for (auto& m : ms) m = intersect(m, skin);
  };

  const bool static_lm = landmarks.size() == 1;
  std::array<video::RoiMask, 5> eff = masks0;
  apply_skin(eff);

  std::array<core::RgbTrace, 5> traces;
  for (auto& t : traces) t.fs = src->fs;
  for (std::size_t t = 0; t < src->frames.size(); ++t) {
    if (!static_lm && t > 0) {
      eff = region_masks(
          regions_from_landmarks(landmarks[t], seq.width, seq.height),
          seq.width, seq.height);
      apply_skin(eff);
    }
    for (std::size_t r = 0; r < traces.size(); ++r) {
      video::Rgb m = video::mean_rgb_over_mask(src->frames[t], eff[r]);
      traces[r].r.push_back(m.r);
      traces[r].g.push_back(m.g);
      traces[r].b.push_back(m.b);
    }
  }

  RegionsResult out;
  std::array<std::vector<core::RppgSignal>, 5> filtered;
  for (std::size_t r = 0; r < traces.size(); ++r) {
    out.timelines[r].fs = src->fs;
    out.timelines[r].cfg = cfg;
    for (std::size_t s : starts) {
      ChainOutput w = run_window_chain(slice_trace(traces[r], s, win),
                                       static_cast<double>(s) / src->fs, cfg);
      out.timelines[r].entries.push_back(w.metrics);
      filtered[r].push_back(std::move(w.filtered));
    }
  }

  out.reference_index = pad::select_reference_region(std::span(
      out.timelines.data(), out.timelines.size()));
  for (std::size_t r = 0; r < out.timelines.size(); ++r) {
    for (std::size_t wi = 0; wi < starts.size(); ++wi) {
      out.timelines[r].entries[wi].rho_ref =
          r == out.reference_index
              ? 1.0
              : safe_corr(filtered[r][wi], filtered[out.reference_index][wi]);
    }
  }
  return out;
}

LocalResult analyze_local(const video::FrameSequence& seq,
                          const video::RoiMask* roi,
                          const video::RoiMask* ref,
                          const core::AnalysisConfig& cfg,
                          std::optional<double> external_hr,
                          const PipelineOptions& opt) {
  cfg.validate();
  const char* where = "scales.local";
  if (seq.frames.empty()) fail(Errc::TooShortRecording, where, "no frames");
  if (roi != nullptr) {
    if (roi->width != seq.width || roi->height != seq.height)
      fail(Errc::DimensionMismatch, where,
           "ROI mask does not match frame size");
    if (roi->count_set() == 0)
      fail(Errc::EmptyMask, where, "ROI mask has no set pixels");
  }
  if (ref != nullptr) {
    if (ref->width != seq.width || ref->height != seq.height)
      fail(Errc::DimensionMismatch, where,
           "reference mask does not match frame size");
    if (ref->count_set() == 0)
      fail(Errc::EmptyMask, where, "reference mask has no set pixels");
  } else if (external_hr) {
    core::reference_from_hr(*external_hr, seq.fs, cfg.t_win);
    if (*external_hr < cfg.f1 || *external_hr > cfg.f2)
      fail(Errc::OutOfBand, where,
           "external heart rate outside the analysis band");
  } else {
    fail(Errc::MissingReference, where,
         "need a reference mask or an external heart rate");
  }

  // Motion compensation runs at full resolution, before downscaling, so the
  // recovered integer shifts are exact at the native pixel grid.
  const video::FrameSequence* full = &seq;
  video::FrameSequence registered;
  if (opt.register_frames && seq.frames.size() > 1) {
    video::RoiMask search =
        roi != nullptr ? *roi : video::RoiMask::filled(seq.width, seq.height, 1);
    registered = registered_copy(seq, search, opt.threads);
    full = &registered;
  }

  LocalResult out;
  out.level = video::pyramid_level_for(seq.width, seq.height,
                                       opt.pyramid_target_px);
  video::FrameSequence down =
      video::pyramid_downscale(*full, opt.pyramid_target_px, opt.threads);
  out.width = down.width;
  out.height = down.height;

  const std::vector<std::size_t> starts =
      window_starts(down.size(), down.fs, cfg);
  if (starts.empty())
    fail(Errc::TooShortRecording, where,
         "recording shorter than one analysis window");
  const std::size_t win = window_samples(down.fs, cfg);

  const std::size_t n_px =
      static_cast<std::size_t>(down.width) * down.height;
  std::vector<std::uint8_t> defined(n_px, 1);
  if (roi != nullptr) {
    video::RoiMask roi_l = video::mask_at_level(*roi, out.level);
    for (std::size_t i = 0; i < n_px; ++i) defined[i] &= roi_l.bits[i];
  }
  if (opt.skin_seg) {
    video::RoiMask skin = video::skin_segment(down.frames[0]);
    for (std::size_t i = 0; i < n_px; ++i) defined[i] &= skin.bits[i];
  }

  // The reference chain supplies the global per-window f_hr the SNR and
  // magnitude maps are evaluated at, and the signal rho is taken against.
  out.reference.fs = down.fs;
  out.reference.cfg = cfg;
  std::vector<double> f_global(starts.size(),
                               external_hr ? *external_hr : 0.0);
  std::vector<core::RppgSignal> ref_filtered(starts.size());
  if (ref != nullptr) {
    video::RoiMask ref_l = video::mask_at_level(*ref, out.level);
    if (ref_l.count_set() == 0)
      fail(Errc::EmptyMask, where,
           "reference mask vanished at the analysis level");
    core::RgbTrace ref_trace = trace_over_mask(down, ref_l);
    for (std::size_t wi = 0; wi < starts.size(); ++wi) {
      ChainOutput w =
          run_window_chain(slice_trace(ref_trace, starts[wi], win),
                           static_cast<double>(starts[wi]) / down.fs, cfg);
      w.metrics.rho_ref = 1.0;
      f_global[wi] = w.metrics.f_hr;
      ref_filtered[wi] = std::move(w.filtered);
      out.reference.entries.push_back(w.metrics);
    }
  }

  out.windows.resize(starts.size());
  for (auto& m : out.windows) {
    m.width = down.width;
    m.height = down.height;
    m.magnitude.assign(n_px, kNaN);
    m.snr_db.assign(n_px, kNaN);
    m.rho_ref.assign(n_px, kNaN);
    m.bpm.assign(n_px, kNaN);
  }

  const std::size_t n_frames = down.frames.size();
  util::parallel_for(n_px, opt.threads, [&](std::size_t p) {
    if (!defined[p]) return;
    const int x = static_cast<int>(p % static_cast<std::size_t>(down.width));
    const int y = static_cast<int>(p / static_cast<std::size_t>(down.width));
    core::RgbTrace px;
    px.fs = down.fs;
    px.r.resize(n_frames);
    px.g.resize(n_frames);
    px.b.resize(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t) {
      const std::uint8_t* q = down.frames[t].px(x, y);
      px.r[t] = q[0];
      px.g[t] = q[1];
      px.b[t] = q[2];
    }
    for (std::size_t wi = 0; wi < starts.size(); ++wi) {
      try {
        core::RgbTrace window = slice_trace(px, starts[wi], win);
        core::PosResult pos = core::pos_project(core::normalize_trace(window));
        core::RppgSignal filt = core::bandpass_filter(pos.h, cfg);
        core::Spectrum spec = core::magnitude_spectrum(filt, cfg);
        core::SnrMagnitude sm = core::snr_and_magnitude(spec, f_global[wi], cfg);
        const double own_f = core::estimate_hr(spec, cfg);
        const double rho = ref != nullptr
                               ? safe_corr(filt, ref_filtered[wi])
                               : core::quadrature_corr(filt, *external_hr);
        auto& m = out.windows[wi];
        m.magnitude[p] = sm.magnitude;
        m.snr_db[p] = sm.snr.snr_db;
        m.rho_ref[p] = rho;
        m.bpm[p] = 60.0 * own_f;
      } catch (const Error&) {
        // Pixel unanalyzable in this window; it stays absent in all four
        // maps, keeping their defined sets identical.
      }
    }
  });
  return out;
}

double reperfusion_event_time(const MetricsTimeline& tl) {
  if (tl.entries.empty()) return kNaN;
  double lo = tl.entries.front().pi;
  double hi = lo;
  for (const auto& e : tl.entries) {
    lo = std::min(lo, e.pi);
    hi = std::max(hi, e.pi);
  }
  const double range = hi - lo;
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tl.entries.size(); ++i) {
    const double v = range > 0.0 ? (tl.entries[i].pi - lo) / range : 0.0;
    if (v > best_v) {  // strict: ties resolve to the earliest window
      best_v = v;
      best = i;
    }
  }
  return tl.entries[best].t_start;
}

}  // namespace rppg::scales
