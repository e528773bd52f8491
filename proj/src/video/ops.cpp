#include "rppg/video/ops.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "rppg/core/fft.hpp"
#include "rppg/errors.hpp"
#include "rppg/util/parallel.hpp"

namespace rppg::video {

namespace {

using cd = std::complex<double>;

void fft2(std::vector<cd>& a, std::size_t w, std::size_t h, bool inverse) {
  std::vector<cd> line;
  line.resize(w);
  for (std::size_t y = 0; y < h; ++y) {
    std::copy_n(a.begin() + y * w, w, line.begin());
    core::fft(line, inverse);
    std::copy_n(line.begin(), w, a.begin() + y * w);
  }
  line.resize(h);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) line[y] = a[y * w + x];
    core::fft(line, inverse);
    for (std::size_t y = 0; y < h; ++y) a[y * w + x] = line[y];
  }
}

double luma(const std::uint8_t* p) {
  return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
}

struct Bbox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
};

Bbox mask_bbox(const RoiMask& mask) {
  Bbox b{mask.width, mask.height, -1, -1};
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) {
        b.x0 = std::min(b.x0, x);
        b.y0 = std::min(b.y0, y);
        b.x1 = std::max(b.x1, x);
        b.y1 = std::max(b.y1, y);
      }
  return b;
}

// 5x5 Gaussian (sigma = 1) as a separable kernel.
constexpr double kGauss0 = 1.0;
constexpr double kGauss1 = 0.60653065971263342;  // exp(-1/2)
constexpr double kGauss2 = 0.13533528323661270;  // exp(-2)
constexpr double kGaussNorm = kGauss0 + 2.0 * kGauss1 + 2.0 * kGauss2;

}  // namespace

Rgb mean_rgb_over_mask(const Image& frame, const RoiMask& mask) {
  if (frame.width != mask.width || frame.height != mask.height)
    fail(Errc::DimensionMismatch, "video.ops",
         "mask dimensions differ from frame");
  double r = 0.0, g = 0.0, b = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (!mask.at(x, y)) continue;
      const std::uint8_t* p = frame.px(x, y);
      r += p[0];
      g += p[1];
      b += p[2];
      ++n;
    }
  }
  if (n == 0) fail(Errc::EmptyMask, "video.ops", "mask has no set pixels");
  const double inv = 1.0 / static_cast<double>(n);
  return Rgb{r * inv, g * inv, b * inv};
}

Shift register_translation(const Image& reference, const Image& moving,
                           const RoiMask& search) {
  if (reference.width != moving.width || reference.height != moving.height)
    fail(Errc::DimensionMismatch, "video.ops", "frame sizes differ");
  if (search.width != reference.width || search.height != reference.height)
    fail(Errc::DimensionMismatch, "video.ops",
         "search mask dimensions differ from frames");
  if (search.count_set() < 64)
    fail(Errc::TooSmall, "video.ops", "search mask area below 64 px");

  const Bbox box = mask_bbox(search);
  const std::size_t w = core::next_pow2(static_cast<std::size_t>(box.width()));
  const std::size_t h = core::next_pow2(static_cast<std::size_t>(box.height()));

  std::vector<cd> fa(w * h, cd{0.0, 0.0});
  std::vector<cd> fb(w * h, cd{0.0, 0.0});
  double mean_a = 0.0, mean_b = 0.0;
  const double inv_n = 1.0 / (static_cast<double>(box.width()) * box.height());
  for (int y = box.y0; y <= box.y1; ++y)
    for (int x = box.x0; x <= box.x1; ++x) {
      mean_a += luma(reference.px(x, y)) * inv_n;
      mean_b += luma(moving.px(x, y)) * inv_n;
    }
  for (int y = box.y0; y <= box.y1; ++y)
    for (int x = box.x0; x <= box.x1; ++x) {
      const std::size_t i =
          static_cast<std::size_t>(y - box.y0) * w + (x - box.x0);
      fa[i] = luma(reference.px(x, y)) - mean_a;
      fb[i] = luma(moving.px(x, y)) - mean_b;
    }

  fft2(fa, w, h, false);
  fft2(fb, w, h, false);
  for (std::size_t i = 0; i < fa.size(); ++i) {
    const cd c = fa[i] * std::conj(fb[i]);
    const double mag = std::abs(c);
    fa[i] = mag > 1e-15 ? c / mag : cd{0.0, 0.0};
  }
  fft2(fa, w, h, true);

  std::size_t peak = 0;
  double peak_val = fa[0].real();
  for (std::size_t i = 1; i < fa.size(); ++i)
    if (fa[i].real() > peak_val) {
      peak_val = fa[i].real();
      peak = i;
    }
  const int px = static_cast<int>(peak % w);
  const int py = static_cast<int>(peak / w);

  // Strongest correlation outside the 5x5 neighborhood of the peak
  // (wrap-aware); a flat or multi-peak surface means unreliable content.
  double second = -1e300;
  const int iw = static_cast<int>(w);
  const int ih = static_cast<int>(h);
  for (int y = 0; y < ih; ++y) {
    int ddy = std::abs(y - py);
    ddy = std::min(ddy, ih - ddy);
    for (int x = 0; x < iw; ++x) {
      int ddx = std::abs(x - px);
      ddx = std::min(ddx, iw - ddx);
      if (ddx <= 2 && ddy <= 2) continue;
      second = std::max(second, fa[static_cast<std::size_t>(y) * w + x].real());
    }
  }

  Shift s;
  s.peak_ratio = second > 1e-12 ? peak_val / second
                                : (peak_val > 0.0 ? 1e9 : 0.0);
  if (!(peak_val > 0.0) || s.peak_ratio < 2.0) {
    s.confident = false;
    return s;  // (0, 0), low confidence
  }
  s.dx = px > iw / 2 ? px - iw : px;
  s.dy = py > ih / 2 ? py - ih : py;
  return s;
}

Image translate_clamp(const Image& img, int dx, int dy) {
  Image out;
  out.width = img.width;
  out.height = img.height;
  out.data.resize(img.data.size());
  for (int y = 0; y < img.height; ++y) {
    const int sy = std::clamp(y - dy, 0, img.height - 1);
    for (int x = 0; x < img.width; ++x) {
      const int sx = std::clamp(x - dx, 0, img.width - 1);
      const std::uint8_t* src = img.px(sx, sy);
      std::uint8_t* dst = out.px(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return out;
}

RoiMask skin_segment(const Image& frame) {
  RoiMask mask;
  mask.width = frame.width;
  mask.height = frame.height;
  mask.bits.resize(static_cast<std::size_t>(frame.width) * frame.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    const std::uint8_t* p = frame.data.data() + i * 3;
    const double r = p[0], g = p[1], b = p[2];
    const double cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    const double cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    mask.bits[i] =
        (cb >= 77.0 && cb <= 127.0 && cr >= 133.0 && cr <= 173.0) ? 1 : 0;
  }
  return mask;
}

int dim_at_level(int dim, int level) {
  for (int i = 0; i < level; ++i) dim = (dim + 1) / 2;
  return dim;
}

int pyramid_level_for(int width, int height, int target_px) {
  int best_level = 0;
  long long best_diff = -1;
  int w = width, h = height;
  for (int level = 0; level < 32; ++level) {
    const long long count = static_cast<long long>(w) * h;
    const long long diff = std::llabs(count - target_px);
    if (best_diff < 0 || diff <= best_diff) {  // ties toward deeper level
      best_diff = diff;
      best_level = level;
    }
    if (w == 1 && h == 1) break;
    w = (w + 1) / 2;
    h = (h + 1) / 2;
  }
  return best_level;
}

Image pyramid_step(const Image& img) {
  const int w = img.width;
  const int h = img.height;
  // Horizontal then vertical blur in doubles; one rounding at decimation.
  std::vector<double> tmp(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        acc += kGauss2 * img.px(std::clamp(x - 2, 0, w - 1), y)[c];
        acc += kGauss1 * img.px(std::clamp(x - 1, 0, w - 1), y)[c];
        acc += kGauss0 * img.px(x, y)[c];
        acc += kGauss1 * img.px(std::clamp(x + 1, 0, w - 1), y)[c];
        acc += kGauss2 * img.px(std::clamp(x + 2, 0, w - 1), y)[c];
        tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c] = acc / kGaussNorm;
      }
    }
  }

  Image out;
  out.width = (w + 1) / 2;
  out.height = (h + 1) / 2;
  out.data.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  for (int oy = 0; oy < out.height; ++oy) {
    const int y = oy * 2;
    for (int ox = 0; ox < out.width; ++ox) {
      const int x = ox * 2;
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        acc += kGauss2 * tmp[(static_cast<std::size_t>(std::clamp(y - 2, 0, h - 1)) * w + x) * 3 + c];
        acc += kGauss1 * tmp[(static_cast<std::size_t>(std::clamp(y - 1, 0, h - 1)) * w + x) * 3 + c];
        acc += kGauss0 * tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c];
        acc += kGauss1 * tmp[(static_cast<std::size_t>(std::clamp(y + 1, 0, h - 1)) * w + x) * 3 + c];
        acc += kGauss2 * tmp[(static_cast<std::size_t>(std::clamp(y + 2, 0, h - 1)) * w + x) * 3 + c];
        const double v = acc / kGaussNorm;
        out.data[(static_cast<std::size_t>(oy) * out.width + ox) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
      }
    }
  }
  return out;
}

FrameSequence pyramid_downscale(const FrameSequence& seq, int target_px,
                                int threads) {
  if (seq.width < 2 || seq.height < 2)
    fail(Errc::TooSmall, "video.ops", "frames must be at least 2x2");
  if (seq.frames.empty())
    fail(Errc::TooSmall, "video.ops", "no frames to downscale");
  if (target_px < 1)
    fail(Errc::BadConfig, "video.ops", "target_px must be positive");

  const int level = pyramid_level_for(seq.width, seq.height, target_px);
  if (level == 0) return seq;

  FrameSequence out;
  out.fs = seq.fs;
  out.width = dim_at_level(seq.width, level);
  out.height = dim_at_level(seq.height, level);
  out.frames.resize(seq.frames.size());
  util::parallel_for(seq.frames.size(), threads, [&](std::size_t i) {
    Image img = seq.frames[i];
    for (int l = 0; l < level; ++l) img = pyramid_step(img);
    out.frames[i] = std::move(img);
  });
  return out;
}

RoiMask mask_at_level(const RoiMask& mask, int levels) {
  RoiMask out = mask;
  for (int l = 0; l < levels; ++l) {
    RoiMask next;
    next.width = (out.width + 1) / 2;
    next.height = (out.height + 1) / 2;
    next.bits.resize(static_cast<std::size_t>(next.width) * next.height);
    for (int y = 0; y < next.height; ++y)
      for (int x = 0; x < next.width; ++x)
        next.set(x, y, out.at(x * 2, y * 2));
    out = std::move(next);
  }
  return out;
}

}  // namespace rppg::video
