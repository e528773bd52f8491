#include "rppg/core/butterworth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rppg/errors.hpp"

namespace rppg::core {

namespace {

using cd = std::complex<double>;

// Analog Butterworth prototype poles (unit cutoff, left half plane).
std::vector<cd> prototype_poles(int order) {
  std::vector<cd> poles;
  poles.reserve(order);
  for (int k = 0; k < order; ++k) {
    const double theta = M_PI * (2.0 * k + order + 1.0) / (2.0 * order);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

cd bilinear(cd s, double fs2) { return (fs2 + s) / (fs2 - s); }

// Denominator coefficients from a digital pole pair whose product and sum
// are real (conjugate pair or two real poles).
void set_denominator(Biquad& q, cd p1, cd p2) {
  q.a1 = -(p1 + p2).real();
  q.a2 = (p1 * p2).real();
}

cd biquad_response(const Biquad& q, double omega) {
  const cd z1 = std::polar(1.0, -omega);
  const cd z2 = z1 * z1;
  return (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
}

void normalize_section(Biquad& q, double omega) {
  const double mag = std::abs(biquad_response(q, omega));
  if (!(mag > 0.0))
    throw std::runtime_error("butterworth: degenerate section gain");
  const double g = 1.0 / mag;
  q.b0 *= g;
  q.b1 *= g;
  q.b2 *= g;
}

// Steady-state state vector of a section for a unit-step input, used to
// suppress startup transients (scaled by the first input sample).
void step_zi(const Biquad& q, double zi[2]) {
  const double denom = 1.0 + q.a1 + q.a2;
  const double h = (q.b0 + q.b1 + q.b2) / denom;
  zi[1] = q.b2 - q.a2 * h;
  zi[0] = q.b1 + q.b2 - (q.a1 + q.a2) * h;
}

}  // namespace

SosFilter SosFilter::butter_bandpass(int order, double f1, double f2,
                                     double fs) {
  if (order < 1 || !(0.0 < f1) || !(f1 < f2) || !(f2 < fs / 2.0))
    fail(Errc::BadConfig, "butterworth", "need 0 < f1 < f2 < fs/2");

  const double fs2 = 2.0 * fs;
  const double w1 = fs2 * std::tan(M_PI * f1 / fs);
  const double w2 = fs2 * std::tan(M_PI * f2 / fs);
  const double bw = w2 - w1;
  const double w0 = std::sqrt(w1 * w2);
  const double omega0 = 2.0 * std::atan(w0 / fs2);

  SosFilter f;
  const double tol = 1e-12;
  for (const cd& p : prototype_poles(order)) {
    if (p.imag() < -tol) continue;  // conjugates handled with their partner
    // Low-pass -> band-pass: each prototype pole yields two poles.
    const cd alpha = p * (bw / 2.0);
    const cd delta = std::sqrt(alpha * alpha - w0 * w0);
    const cd sa = alpha + delta;
    const cd sb = alpha - delta;
    if (p.imag() > tol) {
      // Complex prototype pole: sa and sb each pair with the conjugate
      // arising from conj(p); build one section per pole.
      for (const cd& s : {sa, sb}) {
        const cd zp = bilinear(s, fs2);
        Biquad q{1.0, 0.0, -1.0, 0.0, 0.0};
        set_denominator(q, zp, std::conj(zp));
        normalize_section(q, omega0);
        f.sections_.push_back(q);
      }
    } else {
      // Real prototype pole: the two images form one section (they are
      // either both real or a conjugate pair).
      const cd za = bilinear(sa, fs2);
      const cd zb = bilinear(sb, fs2);
      Biquad q{1.0, 0.0, -1.0, 0.0, 0.0};
      set_denominator(q, za, zb);
      normalize_section(q, omega0);
      f.sections_.push_back(q);
    }
  }
  return f;
}

SosFilter SosFilter::butter_lowpass(int order, double fc, double fs) {
  if (order < 1 || !(0.0 < fc) || !(fc < fs / 2.0))
    fail(Errc::BadConfig, "butterworth", "need 0 < fc < fs/2");

  const double fs2 = 2.0 * fs;
  const double wc = fs2 * std::tan(M_PI * fc / fs);

  SosFilter f;
  const double tol = 1e-12;
  for (const cd& p : prototype_poles(order)) {
    if (p.imag() < -tol) continue;
    const cd zp = bilinear(p * wc, fs2);
    if (p.imag() > tol) {
      Biquad q{1.0, 2.0, 1.0, 0.0, 0.0};
      set_denominator(q, zp, std::conj(zp));
      normalize_section(q, 0.0);
      f.sections_.push_back(q);
    } else {
      Biquad q{1.0, 1.0, 0.0, 0.0, 0.0};
      q.a1 = -zp.real();
      q.a2 = 0.0;
      normalize_section(q, 0.0);
      f.sections_.push_back(q);
    }
  }
  return f;
}

std::vector<double> SosFilter::filter(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& q : sections_) {
    double zi[2];
    step_zi(q, zi);
    double z1 = y.empty() ? 0.0 : zi[0] * y.front();
    double z2 = y.empty() ? 0.0 : zi[1] * y.front();
    for (double& v : y) {
      const double in = v;
      const double out = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * out + z2;
      z2 = q.b2 * in - q.a2 * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> SosFilter::filtfilt(std::span<const double> x) const {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const std::size_t want = 3 * (2 * sections_.size() + 1);
  const std::size_t padlen = std::min(want, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (std::size_t i = 0; i < padlen; ++i)
    ext.push_back(2.0 * x[0] - x[padlen - i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < padlen; ++i)
    ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

  std::vector<double> y = filter(ext);
  std::reverse(y.begin(), y.end());
  y = filter(y);
  std::reverse(y.begin(), y.end());

  return std::vector<double>(y.begin() + padlen, y.begin() + padlen + n);
}

std::complex<double> SosFilter::response(double omega) const {
  cd h(1.0, 0.0);
  for (const Biquad& q : sections_) h *= biquad_response(q, omega);
  return h;
}

}  // namespace rppg::core
