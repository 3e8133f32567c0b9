#include "nts/vocoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "nts/error.hpp"
#include "nts/random.hpp"
#include "text_util.hpp"

namespace nts {
namespace {

constexpr double kPi = std::numbers::pi;

bool finite_frame(const FrameParams& f) {
  if (!std::isfinite(f.f0) || !std::isfinite(f.power) || !std::isfinite(f.boundary_freq)) return false;
  return std::all_of(f.lsf.begin(), f.lsf.end(), [](double v) { return std::isfinite(v); });
}

// Symmetric polynomial c[0..10] (c[k] == c[10-k]) on the unit circle, with the
// linear-phase factor removed: c5 + 2 sum_{m=1..5} c[5-m] T_m(x), x = cos w.
double eval_symmetric(const std::array<double, 11>& c, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (int m = 5; m >= 1; --m) {
    const double b0 = 2.0 * c[5 - m] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  // Clenshaw: sum_{m>=1} d_m T_m(x) = x*b1 - b2 with the m = 0 term added.
  return c[5] + x * b1 - b2;
}

// Roots in (0, pi) of a symmetric polynomial, located on an n-point grid.
std::vector<double> grid_roots(const std::array<double, 11>& c, std::size_t n) {
  std::vector<double> roots;
  double w0 = 0.0;
  double v0 = eval_symmetric(c, 1.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double w1 = kPi * static_cast<double>(i) / static_cast<double>(n);
    const double v1 = eval_symmetric(c, std::cos(w1));
    if (v0 == 0.0 && i > 1) {
      roots.push_back(w0);
    } else if ((v0 < 0.0) != (v1 < 0.0) && v1 != 0.0 && v0 != 0.0) {
      double lo = w0, hi = w1, vlo = v0;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double vm = eval_symmetric(c, std::cos(mid));
        if (vm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((vm < 0.0) == (vlo < 0.0)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    w0 = w1;
    v0 = v1;
  }
  return roots;
}

std::array<double, 12> poly_mul_quadratic_chain(const std::vector<double>& cosines) {
  std::array<double, 12> p{};
  p[0] = 1.0;
  std::size_t deg = 0;
  for (double cw : cosines) {
    // (1 - 2 cos w z^-1 + z^-2)
    for (std::size_t k = deg + 2; k >= 1; --k) {
      double v = p[k];
      v += -2.0 * cw * p[k - 1];
      if (k >= 2) v += p[k - 2];
      p[k] = v;
    }
    deg += 2;
  }
  return p;
}

std::vector<double> hamming(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
  return w;
}

// Linear-phase FIR applied with its group delay removed.
std::vector<double> filter_zero_phase(const std::vector<double>& x, const std::vector<double>& h) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto m = static_cast<std::ptrdiff_t>(h.size());
  const auto delay = (m - 1) / 2;
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < m; ++k) {
      const auto j = i + delay - k;
      if (j >= 0 && j < n) acc += h[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

double nccf_at(const std::vector<double>& x, std::ptrdiff_t start, std::size_t len, std::size_t lag) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  auto at = [&](std::ptrdiff_t i) { return (i >= 0 && i < n) ? x[static_cast<std::size_t>(i)] : 0.0; };
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double a = at(start + static_cast<std::ptrdiff_t>(i));
    const double b = at(start + static_cast<std::ptrdiff_t>(i + lag));
    xy += a * b;
    xx += a * a;
    yy += b * b;
  }
  const double d = std::sqrt(xx * yy);
  return d > 1e-20 ? xy / d : 0.0;
}

struct Pitch {
  double f0 = 0.0;
  double lag = 0.0;
  double strength = 0.0;
};

Pitch estimate_pitch(const std::vector<double>& x, std::ptrdiff_t centre, const VocoderConfig& cfg) {
  const auto min_lag = static_cast<std::size_t>(std::floor(cfg.sample_rate / cfg.f0_max));
  const auto max_lag = static_cast<std::size_t>(std::ceil(cfg.sample_rate / cfg.f0_min));
  // Two periods of the lowest pitch so the longest lag is still averaged.
  const std::size_t len = max_lag;
  const std::ptrdiff_t start = centre - static_cast<std::ptrdiff_t>(max_lag);
  std::vector<double> r(max_lag + 2, 0.0);
  double best = 0.0;
  for (std::size_t lag = min_lag; lag <= max_lag + 1; ++lag) {
    r[lag] = nccf_at(x, start, len, lag);
    if (lag <= max_lag) best = std::max(best, r[lag]);
  }
  Pitch p;
  p.strength = best;
  if (best < cfg.voicing_threshold) return p;
  std::size_t pick = 0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    const double left = lag > min_lag ? r[lag - 1] : -1.0;
    if (r[lag] >= 0.85 * best && r[lag] >= left && r[lag] >= r[lag + 1]) {
      pick = lag;
      break;
    }
  }
  if (pick == 0) return p;
  double lag = static_cast<double>(pick);
  if (pick > min_lag) {
    const double a = r[pick - 1], b = r[pick], c = r[pick + 1];
    const double den = a - 2.0 * b + c;
    if (den < 0.0) lag += std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
  }
  p.lag = lag;
  p.f0 = std::clamp(cfg.sample_rate / lag, cfg.f0_min, cfg.f0_max);
  return p;
}

LineSpectrum robust_lsf(LpcCoefficients a) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    try {
      return lpc_to_lsf(a);
    } catch (const InvalidInput&) {
      // Bandwidth expansion pulls the poles inward.
      double g = 1.0;
      for (auto& v : a) {
        g *= 0.99;
        v *= g;
      }
    }
  }
  return flat_lsf();
}

}  // namespace

std::optional<std::string> frame_violation(const FrameParams& f, double nyquist) {
  if (!finite_frame(f)) return "non-finite parameter";
  if (f.f0 < 0.0) return "negative f0";
  if (f.f0 == 0.0 && f.boundary_freq != 0.0) return "unvoiced frame with nonzero boundary frequency";
  if (f.boundary_freq < 0.0 || f.boundary_freq > nyquist) return "boundary frequency outside [0, Nyquist]";
  if (!(f.lsf[0] > 0.0)) return "lsf[0] not above 0";
  for (std::size_t k = 1; k < kLpcOrder; ++k)
    if (!(f.lsf[k] > f.lsf[k - 1])) return "lsf not strictly increasing at index " + std::to_string(k);
  if (!(f.lsf[kLpcOrder - 1] < kPi)) return "lsf[9] not below pi";
  return std::nullopt;
}

FrameParams clamp_frame(FrameParams f, const VocoderConfig& cfg, double min_gap) {
  if (!std::isfinite(f.power)) f.power = kSilenceFloorDb;
  f.power = std::clamp(f.power, kSilenceFloorDb, 0.0);
  if (!std::isfinite(f.boundary_freq)) f.boundary_freq = 0.0;
  f.boundary_freq = std::clamp(f.boundary_freq, 0.0, cfg.nyquist());
  if (!std::isfinite(f.f0)) f.f0 = 0.0;
  if (f.boundary_freq < 100.0) {
    f.f0 = 0.0;
    f.boundary_freq = 0.0;
  } else {
    f.f0 = std::clamp(f.f0, cfg.f0_min, cfg.f0_max);
  }
  const auto flat = flat_lsf();
  for (std::size_t k = 0; k < kLpcOrder; ++k)
    if (!std::isfinite(f.lsf[k])) f.lsf[k] = flat[k];
  std::sort(f.lsf.begin(), f.lsf.end());
  f.lsf[0] = std::max(f.lsf[0], min_gap);
  for (std::size_t k = 1; k < kLpcOrder; ++k) f.lsf[k] = std::max(f.lsf[k], f.lsf[k - 1] + min_gap);
  f.lsf[kLpcOrder - 1] = std::min(f.lsf[kLpcOrder - 1], kPi - min_gap);
  for (std::size_t k = kLpcOrder - 1; k-- > 0;) f.lsf[k] = std::min(f.lsf[k], f.lsf[k + 1] - min_gap);
  return f;
}

LineSpectrum flat_lsf() {
  LineSpectrum l{};
  for (std::size_t k = 0; k < kLpcOrder; ++k) l[k] = static_cast<double>(k + 1) * kPi / (kLpcOrder + 1);
  return l;
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t order) {
  std::vector<double> r(order + 1, 0.0);
  for (std::size_t k = 0; k <= order && k < x.size(); ++k) {
    double acc = 0.0;
    for (std::size_t n = k; n < x.size(); ++n) acc += x[n] * x[n - k];
    r[k] = acc;
  }
  return r;
}

std::vector<double> levinson_durbin(std::span<const double> r, std::size_t order, double* error) {
  if (r.size() < order + 1) throw InvalidInput("levinson_durbin: need order + 1 autocorrelation lags");
  std::vector<double> a(order, 0.0), tmp(order, 0.0);
  double e = r[0];
  if (!(e > 0.0)) {
    if (error) *error = 0.0;
    return a;
  }
  for (std::size_t m = 0; m < order; ++m) {
    double acc = r[m + 1];
    for (std::size_t i = 0; i < m; ++i) acc += a[i] * r[m - i];
    const double k = -acc / e;
    if (!(std::abs(k) < 1.0)) break;
    tmp = a;
    for (std::size_t i = 0; i < m; ++i) a[i] = tmp[i] + k * tmp[m - 1 - i];
    a[m] = k;
    e *= (1.0 - k * k);
    if (!(e > 0.0)) break;
  }
  if (error) *error = e;
  return a;
}

std::vector<double> reflection_coefficients(std::span<const double> a_in) {
  std::vector<double> a(a_in.begin(), a_in.end());
  std::vector<double> k(a.size(), 0.0);
  for (std::size_t m = a.size(); m-- > 0;) {
    k[m] = a[m];
    const double den = 1.0 - k[m] * k[m];
    if (!(std::abs(k[m]) < 1.0)) return k;
    std::vector<double> prev(m);
    for (std::size_t i = 0; i < m; ++i) prev[i] = (a[i] - k[m] * a[m - 1 - i]) / den;
    for (std::size_t i = 0; i < m; ++i) a[i] = prev[i];
  }
  return k;
}

LineSpectrum lpc_to_lsf(const LpcCoefficients& a) {
  for (double v : a)
    if (!std::isfinite(v)) throw InvalidInput("lpc_to_lsf: non-finite coefficient");
  for (double k : reflection_coefficients(a))
    if (!(std::abs(k) < 1.0)) throw InvalidInput("lpc_to_lsf: filter is not minimum phase");

  constexpr std::size_t p = kLpcOrder;
  std::array<double, p + 2> full{};
  full[0] = 1.0;
  for (std::size_t k = 0; k < p; ++k) full[k + 1] = a[k];
  std::array<double, p + 2> sum{}, diff{};
  for (std::size_t k = 0; k <= p + 1; ++k) {
    sum[k] = full[k] + full[p + 1 - k];
    diff[k] = full[k] - full[p + 1 - k];
  }
  std::array<double, 11> ps{}, qs{};
  ps[0] = sum[0];
  qs[0] = diff[0];
  for (std::size_t k = 1; k <= p; ++k) {
    ps[k] = sum[k] - ps[k - 1];
    qs[k] = diff[k] + qs[k - 1];
  }
  for (std::size_t n : {std::size_t{512}, std::size_t{4096}, std::size_t{32768}}) {
    const auto pr = grid_roots(ps, n);
    const auto qr = grid_roots(qs, n);
    if (pr.size() != p / 2 || qr.size() != p / 2) continue;
    LineSpectrum out{};
    for (std::size_t i = 0; i < p / 2; ++i) {
      out[2 * i] = pr[i];
      out[2 * i + 1] = qr[i];
    }
    bool ok = out[0] > 0.0 && out[p - 1] < kPi;
    for (std::size_t k = 1; k < p; ++k) ok = ok && out[k] > out[k - 1];
    if (ok) return out;
  }
  throw InvalidInput("lpc_to_lsf: roots of the sum/difference polynomials do not interleave");
}

LpcCoefficients lsf_to_lpc(const LineSpectrum& lsf) {
  for (std::size_t k = 0; k < kLpcOrder; ++k) {
    if (!std::isfinite(lsf[k]) || lsf[k] <= 0.0 || lsf[k] >= kPi)
      throw InvalidInput("lsf_to_lpc: lsf[" + std::to_string(k) + "] outside (0, pi)");
    if (k > 0 && !(lsf[k] > lsf[k - 1]))
      throw InvalidInput("lsf_to_lpc: lsf not strictly increasing at index " + std::to_string(k));
  }
  std::vector<double> even, odd;
  for (std::size_t k = 0; k < kLpcOrder; ++k) (k % 2 == 0 ? even : odd).push_back(std::cos(lsf[k]));
  const auto pp = poly_mul_quadratic_chain(even);
  const auto qq = poly_mul_quadratic_chain(odd);
  // P = P'(1 + z^-1), Q = Q'(1 - z^-1), A = (P + Q) / 2.
  LpcCoefficients a{};
  for (std::size_t k = 1; k <= kLpcOrder; ++k) {
    const double pk = pp[k] + pp[k - 1];
    const double qk = qq[k] - qq[k - 1];
    a[k - 1] = 0.5 * (pk + qk);
  }
  return a;
}

double lpc_envelope_db(const LpcCoefficients& a, double gain, double omega) {
  double re = 1.0, im = 0.0;
  for (std::size_t k = 0; k < kLpcOrder; ++k) {
    re += a[k] * std::cos(static_cast<double>(k + 1) * omega);
    im -= a[k] * std::sin(static_cast<double>(k + 1) * omega);
  }
  return 10.0 * std::log10(gain) - 10.0 * std::log10(re * re + im * im);
}

std::vector<double> design_lowpass(double cutoff_hz, std::size_t taps, int sample_rate) {
  if (taps == 0 || taps % 2 == 0) throw InvalidInput("design_lowpass: tap count must be odd");
  std::vector<double> h(taps, 0.0);
  const std::size_t mid = taps / 2;
  const double nyq = sample_rate / 2.0;
  if (cutoff_hz >= nyq) {
    h[mid] = 1.0;
    return h;
  }
  if (cutoff_hz <= 0.0) return h;
  const double fc = cutoff_hz / sample_rate;
  const auto w = hamming(taps);
  double total = 0.0;
  for (std::size_t i = 0; i < taps; ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(mid);
    const double s = t == 0.0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * t) / (kPi * t);
    h[i] = s * w[i];
    total += h[i];
  }
  for (auto& v : h) v /= total;
  return h;
}

std::vector<FrameParams> analyze(const AudioBuffer& audio, const VocoderConfig& cfg) {
  const std::size_t hop = cfg.frame_samples();
  const std::size_t win = cfg.window_samples();
  if (audio.sample_rate != cfg.sample_rate)
    throw InvalidInput("analyze: sample rate " + std::to_string(audio.sample_rate) + " does not match config");
  if (audio.samples.size() < win)
    throw InvalidInput("analyze: input shorter than one analysis window");
  const auto& x = audio.samples;
  const std::size_t frames = x.size() / hop;
  const auto w = hamming(win);
  double wsq = 0.0;
  for (double v : w) wsq += v * v;

  // Band-limited copies for the per-band periodicity test.
  const double band_width = cfg.nyquist() / static_cast<double>(cfg.bands);
  std::vector<std::vector<double>> band_signal;
  std::vector<double> prev_low(x.size(), 0.0);
  for (std::size_t b = 0; b < cfg.bands; ++b) {
    const auto low = b + 1 == cfg.bands
                         ? x
                         : filter_zero_phase(x, design_lowpass(band_width * static_cast<double>(b + 1),
                                                               cfg.fir_taps, cfg.sample_rate));
    std::vector<double> band(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) band[i] = low[i] - prev_low[i];
    band_signal.push_back(std::move(band));
    prev_low = low;
  }

  std::vector<FrameParams> out(frames);
  std::vector<double> seg(win);
  for (std::size_t i = 0; i < frames; ++i) {
    const auto centre = static_cast<std::ptrdiff_t>(i * hop + hop / 2);
    const std::ptrdiff_t first = centre - static_cast<std::ptrdiff_t>(win / 2);
    double energy = 0.0;
    for (std::size_t n = 0; n < win; ++n) {
      const auto j = first + static_cast<std::ptrdiff_t>(n);
      const double v = (j >= 0 && j < static_cast<std::ptrdiff_t>(x.size())) ? x[static_cast<std::size_t>(j)] : 0.0;
      seg[n] = v * w[n];
      energy += seg[n] * seg[n];
    }
    FrameParams& f = out[i];
    const double ms = energy / wsq;
    f.power = ms > 1e-10 ? std::max(kSilenceFloorDb, 10.0 * std::log10(ms)) : kSilenceFloorDb;

    // Envelope from the pre-emphasized window; power stays on the plain one.
    for (std::size_t n = 0; n < win; ++n) {
      const auto j = first + static_cast<std::ptrdiff_t>(n);
      const double v = (j >= 0 && j < static_cast<std::ptrdiff_t>(x.size())) ? x[static_cast<std::size_t>(j)] : 0.0;
      const double u = (j >= 1 && j <= static_cast<std::ptrdiff_t>(x.size())) ? x[static_cast<std::size_t>(j - 1)] : 0.0;
      seg[n] = (v - cfg.preemphasis * u) * w[n];
    }
    auto r = autocorrelation(seg, kLpcOrder);
    if (r[0] > 0.0) {
      r[0] *= 1.0 + 1e-9;
      const auto coeffs = levinson_durbin(r, kLpcOrder);
      LpcCoefficients a{};
      std::copy(coeffs.begin(), coeffs.end(), a.begin());
      f.lsf = robust_lsf(a);
    } else {
      f.lsf = flat_lsf();
    }

    if (f.power <= kSilenceFloorDb) continue;
    const auto pitch = estimate_pitch(x, centre, cfg);
    if (pitch.f0 <= 0.0) continue;
    const auto lag = static_cast<std::size_t>(std::lround(pitch.lag));
    const std::size_t len = static_cast<std::size_t>(std::ceil(cfg.sample_rate / cfg.f0_min));
    const std::ptrdiff_t start = centre - static_cast<std::ptrdiff_t>(len);
    double bf = 0.0;
    for (std::size_t b = 0; b < cfg.bands; ++b) {
      double best = -1.0;
      for (std::size_t l = lag - 1; l <= lag + 1; ++l) best = std::max(best, nccf_at(band_signal[b], start, len, l));
      if (best > cfg.voicing_threshold) bf = band_width * static_cast<double>(b + 1);
    }
    if (bf > 0.0) {
      f.f0 = pitch.f0;
      f.boundary_freq = bf;
    }
  }
  return out;
}

double soft_clip(double x) {
  const double ax = std::abs(x);
  if (ax <= 0.9) return x;
  return std::copysign(0.9 + 0.1 * std::tanh((ax - 0.9) / 0.1), x);
}

AudioBuffer synthesize(std::span<const FrameParams> frames, const VocoderConfig& cfg) {
  const double nyq = cfg.nyquist();
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (auto v = frame_violation(frames[i], nyq))
      throw InvalidInput("synthesize: frame " + std::to_string(i) + ": " + *v);

  const std::size_t hop = cfg.frame_samples();
  const std::size_t subframes = std::clamp<std::size_t>(cfg.subframes, 1, hop);
  const std::size_t taps = cfg.fir_taps;
  AudioBuffer out;
  out.sample_rate = cfg.sample_rate;
  out.samples.reserve(frames.size() * hop);

  Rng rng(cfg.noise_seed);
  std::vector<double> pulse_hist(taps, 0.0), noise_hist(taps, 0.0);  // ring buffers
  std::size_t ring = 0;
  std::vector<double> h;
  double designed_bf = 0.0;
  double phase = 0.0;
  bool was_voiced = false;
  std::array<double, kLpcOrder> state{};  // all-pole output v[n-1], v[n-2], ...
  double deemph = 0.0;

  std::vector<double> exc(hop), zir(hop), zsr(hop);
  std::vector<LpcCoefficients> coeffs(hop);
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const FrameParams& cur = frames[fi];
    const FrameParams& prev = fi == 0 ? cur : frames[fi - 1];
    std::vector<double> target(subframes);
    double mean = 0.0;
    for (std::size_t j = 0; j < subframes; ++j) {
      const double alpha = static_cast<double>(j + 1) / static_cast<double>(subframes);
      target[j] = std::pow(10.0, ((1.0 - alpha) * prev.power + alpha * cur.power) / 10.0);
      mean += target[j] / static_cast<double>(subframes);
    }

    const std::size_t base = hop / subframes;
    std::size_t n = 0;
    for (std::size_t j = 0; j < subframes; ++j) {
      const std::size_t len = j + 1 == subframes ? hop - base * (subframes - 1) : base;
      const double alpha = static_cast<double>(j + 1) / static_cast<double>(subframes);
      LineSpectrum lsf{};
      for (std::size_t k = 0; k < kLpcOrder; ++k) lsf[k] = (1.0 - alpha) * prev.lsf[k] + alpha * cur.lsf[k];
      const auto a = lsf_to_lpc(lsf);
      double f0 = cur.f0, bf = cur.boundary_freq;
      if (prev.f0 > 0.0 && cur.f0 > 0.0) {
        f0 = (1.0 - alpha) * prev.f0 + alpha * cur.f0;
        bf = (1.0 - alpha) * prev.boundary_freq + alpha * cur.boundary_freq;
      }
      if (h.empty() || std::abs(bf - designed_bf) > cfg.filter_update_hz || ((bf >= nyq) != (designed_bf >= nyq)) ||
          ((bf <= 0.0) != (designed_bf <= 0.0))) {
        h = design_lowpass(bf, taps, cfg.sample_rate);
        designed_bf = bf;
      }
      const bool voiced = f0 > 0.0;
      const double period = voiced ? cfg.sample_rate / f0 : 0.0;
      if (voiced && !was_voiced) phase = period - 1.0;
      was_voiced = voiced;
      // Interpolated power enters as a relative envelope on the excitation.
      const double shape = std::sqrt(target[j] / mean);
      for (std::size_t m = 0; m < len; ++m, ++n) {
        double p = 0.0;
        if (voiced) {
          phase += 1.0;
          if (phase >= period) {
            phase -= period;
            p = std::sqrt(period);
          }
        }
        ring = (ring + 1) % taps;
        pulse_hist[ring] = p;
        noise_hist[ring] = rng.normal();
        // Voiced band: lowpass(pulse). Unvoiced band: delayed noise minus lowpass(noise).
        double acc = noise_hist[(ring + taps - taps / 2) % taps];
        for (std::size_t k = 0; k < taps; ++k) {
          if (h[k] == 0.0) continue;
          const std::size_t idx = (ring + taps - k) % taps;
          acc += h[k] * (pulse_hist[idx] - noise_hist[idx]);
        }
        exc[n] = shape * acc;
        coeffs[n] = a;
      }
    }

    // The time-varying filter (all-pole, then de-emphasis) is linear in
    // (state, input): y = zir + g * zsr.
    auto run = [&](std::array<double, kLpcOrder> s, double d, const std::vector<double>* in, std::vector<double>& y) {
      for (std::size_t m = 0; m < hop; ++m) {
        double v = in ? (*in)[m] : 0.0;
        for (std::size_t k = 0; k < kLpcOrder; ++k) v -= coeffs[m][k] * s[k];
        for (std::size_t k = kLpcOrder - 1; k > 0; --k) s[k] = s[k - 1];
        s[0] = v;
        d = v + cfg.preemphasis * d;
        y[m] = d;
      }
    };
    run(state, deemph, nullptr, zir);
    run(std::array<double, kLpcOrder>{}, 0.0, &exc, zsr);
    // Filter states are linear too, so they scale the same way as the output.
    std::array<double, kLpcOrder> zs = state, ss{};
    double zd = deemph, sd = 0.0;
    auto advance = [&](std::array<double, kLpcOrder>& s, double& d, const std::vector<double>* in) {
      for (std::size_t m = 0; m < hop; ++m) {
        double v = in ? (*in)[m] : 0.0;
        for (std::size_t k = 0; k < kLpcOrder; ++k) v -= coeffs[m][k] * s[k];
        for (std::size_t k = kLpcOrder - 1; k > 0; --k) s[k] = s[k - 1];
        s[0] = v;
        d = v + cfg.preemphasis * d;
      }
    };
    advance(zs, zd, nullptr);
    advance(ss, sd, &exc);
    const double t = std::pow(10.0, cur.power / 10.0) * static_cast<double>(hop);
    double S = 0.0, C = 0.0, Z = 0.0;
    for (std::size_t m = 0; m < hop; ++m) {
      S += zsr[m] * zsr[m];
      C += zir[m] * zsr[m];
      Z += zir[m] * zir[m];
    }
    double g = 0.0, beta = 1.0;
    if (S > 0.0) {
      double disc = C * C - S * (Z - t);
      g = disc >= 0.0 ? (-C + std::sqrt(disc)) / S : -1.0;
      if (g < 0.0) {
        // Ringing carried in from the previous frame already exceeds the target.
        beta = std::sqrt(0.5 * t / Z);
        C *= beta;
        Z *= beta * beta;
        disc = C * C - S * (Z - t);
        g = (-C + std::sqrt(std::max(0.0, disc))) / S;
      }
    } else if (Z > 0.0) {
      beta = std::sqrt(t / Z);
    }
    for (std::size_t m = 0; m < hop; ++m) out.samples.push_back(soft_clip(beta * zir[m] + g * zsr[m]));
    for (std::size_t k = 0; k < kLpcOrder; ++k) state[k] = beta * zs[k] + g * ss[k];
    deemph = beta * zd + g * sd;
  }
  return out;
}


void write_frames(std::ostream& out, std::span<const FrameParams> frames) {
  out << "# f0 power boundary voiced lsf0..lsf9\n";
  out << std::setprecision(17);
  for (const auto& f : frames) {
    out << f.f0 << ' ' << f.power << ' ' << f.boundary_freq << ' ' << (f.f0 > 0.0 ? 1 : 0);
    for (double v : f.lsf) out << ' ' << v;
    out << '\n';
  }
}

void write_frames(const std::filesystem::path& path, std::span<const FrameParams> frames) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_frames(out, frames);
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<FrameParams> read_frames(std::istream& in, const std::string& source) {
  std::vector<FrameParams> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = detail::split_ws(t);
    if (fields.size() != kFrameVectorSize)
      throw ParseError(source, lineno,
                       "expected " + std::to_string(kFrameVectorSize) + " fields, got " + std::to_string(fields.size()));
    std::array<double, kFrameVectorSize> v{};
    for (std::size_t k = 0; k < fields.size(); ++k) {
      std::string s(fields[k]);
      std::size_t used = 0;
      try {
        v[k] = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size())
        throw ParseError(source, lineno, "bad number '" + s + "'");
    }
    FrameParams f;
    f.f0 = v[0];
    f.power = v[1];
    f.boundary_freq = v[2];
    if ((v[3] != 0.0 && v[3] != 1.0) || (v[3] == 1.0) != (f.f0 > 0.0))
      throw ParseError(source, lineno, "voiced flag disagrees with f0");
    for (std::size_t k = 0; k < kLpcOrder; ++k) f.lsf[k] = v[4 + k];
    frames.push_back(f);
  }
  return frames;
}

std::vector<FrameParams> read_frames(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_frames(in, path.string());
}

}  // namespace nts
