#include "support.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <unistd.h>

#include "nts/labels.hpp"

namespace nts::test {

namespace fs = std::filesystem;

fs::path data_dir() { return NTS_DATA_DIR; }
fs::path test_data_dir() { return NTS_TEST_DATA_DIR; }

const nlohmann::json& oracles() {
  static const nlohmann::json j = [] {
    std::ifstream in(test_data_dir() / "oracles.json");
    if (!in) throw std::runtime_error("missing oracles.json");
    return nlohmann::json::parse(in);
  }();
  return j;
}

const FeatureSystem& features() {
  static const FeatureSystem f = FeatureSystem::load_dir(data_dir());
  return f;
}

const Lexicon& lexicon() {
  static const Lexicon lex = Lexicon::load(data_dir() / "lexicon.tsv", features());
  return lex;
}

const std::vector<TaggedSentence>& tagged_corpus() {
  static const auto c = load_tagged_corpus(data_dir() / "tagged_corpus.txt");
  return c;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  path_ = fs::temp_directory_path() /
          ("nts-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

struct Resonator {
  double a1, a2, gain;
  double y1 = 0.0, y2 = 0.0;
  Resonator(double f, double bw, int rate) {
    const double r = std::exp(-std::numbers::pi * bw / rate);
    a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * f / rate);
    a2 = -r * r;
    gain = 1.0 - a1 - a2;
  }
  double step(double x) {
    const double y = gain * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

std::vector<double> lpc10(const std::vector<double>& frame, double* err) {
  constexpr std::size_t p = 10;
  std::vector<double> r(p + 1, 0.0);
  for (std::size_t k = 0; k <= p; ++k)
    for (std::size_t n = k; n < frame.size(); ++n) r[k] += frame[n] * frame[n - k];
  std::vector<double> a(p + 1, 0.0), prev;
  a[0] = 1.0;
  double e = r[0];
  if (e <= 0.0) {
    *err = 0.0;
    return a;
  }
  r[0] *= 1.0 + 1e-9;
  e = r[0];
  for (std::size_t i = 1; i <= p; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / e;
    prev = a;
    for (std::size_t j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    e *= 1.0 - k * k;
  }
  *err = e;
  return a;
}

std::vector<std::vector<double>> envelopes(const AudioBuffer& audio, double max_hz, std::size_t points) {
  const std::size_t win = static_cast<std::size_t>(0.025 * audio.sample_rate);
  const std::size_t hop = static_cast<std::size_t>(0.010 * audio.sample_rate);
  std::vector<std::vector<double>> out;
  for (std::size_t start = 0; start + win <= audio.samples.size(); start += hop) {
    std::vector<double> frame(win);
    double energy = 0.0;
    for (std::size_t n = 0; n < win; ++n) {
      const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (win - 1));
      frame[n] = audio.samples[start + n] * w;
      energy += frame[n] * frame[n];
    }
    if (energy < 1e-10) {
      out.emplace_back();
      continue;
    }
    double err = 0.0;
    const auto a = lpc10(frame, &err);
    std::vector<double> env(points);
    for (std::size_t i = 0; i < points; ++i) {
      const double w = 2.0 * std::numbers::pi * (max_hz * (i + 0.5) / points) / audio.sample_rate;
      double re = 0.0, im = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        re += a[k] * std::cos(w * k);
        im -= a[k] * std::sin(w * k);
      }
      env[i] = 10.0 * std::log10(err / win) - 10.0 * std::log10(re * re + im * im);
    }
    out.push_back(std::move(env));
  }
  return out;
}

}  // namespace

AudioBuffer two_formant_vowel(double f0, double seconds, double f1, double f2, int sample_rate) {
  AudioBuffer out;
  out.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  out.samples.resize(n);
  Resonator r1(f1, 80.0, sample_rate), r2(f2, 100.0, sample_rate);
  const double period = sample_rate / f0;
  double next_pulse = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0;
    if (static_cast<double>(i) >= next_pulse) {
      x = 1.0;
      next_pulse += period;
    }
    out.samples[i] = r2.step(r1.step(x));
    peak = std::max(peak, std::abs(out.samples[i]));
  }
  for (auto& s : out.samples) s *= 0.5 / peak;
  return out;
}

static std::size_t best_delay(const AudioBuffer& ref, const AudioBuffer& test, std::size_t max_delay) {
  std::size_t best = 0;
  double best_c = -2.0;
  const std::size_t n = std::min(ref.samples.size(), test.samples.size());
  for (std::size_t d = 0; d <= max_delay && d < n; ++d) {
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t i = 0; i + d < n; ++i) {
      xy += ref.samples[i] * test.samples[i + d];
      xx += ref.samples[i] * ref.samples[i];
      yy += test.samples[i + d] * test.samples[i + d];
    }
    const double c = xx > 0.0 && yy > 0.0 ? xy / std::sqrt(xx * yy) : 0.0;
    if (c > best_c) {
      best_c = c;
      best = d;
    }
  }
  return best;
}

double lpc_log_spectral_distance(const AudioBuffer& ref, const AudioBuffer& test, double max_hz) {
  constexpr std::size_t kPoints = 128;
  // Compare like with like: undo any processing delay in `test` first.
  const std::size_t delay = best_delay(ref, test, static_cast<std::size_t>(0.010 * ref.sample_rate));
  AudioBuffer shifted = test;
  shifted.samples.erase(shifted.samples.begin(),
                        shifted.samples.begin() + static_cast<std::ptrdiff_t>(std::min(delay, test.samples.size())));
  const auto a = envelopes(ref, max_hz, kPoints);
  const auto b = envelopes(shifted, max_hz, kPoints);
  const std::size_t frames = std::min(a.size(), b.size());
  double total = 0.0;
  std::size_t used = 0;
  // The first and last frames see the edges of the signals.
  for (std::size_t f = 3; f + 3 < frames; ++f) {
    if (a[f].empty() || b[f].empty()) continue;
    double sq = 0.0;
    for (std::size_t i = 0; i < kPoints; ++i) sq += (a[f][i] - b[f][i]) * (a[f][i] - b[f][i]);
    total += std::sqrt(sq / kPoints);
    ++used;
  }
  if (used == 0) throw std::runtime_error("no frames to compare");
  return total / used;
}

double estimate_f0(const AudioBuffer& audio, double f0_min, double f0_max) {
  const std::size_t n = audio.samples.size();
  const std::size_t start = n / 4, len = n / 2;
  const auto lag_min = static_cast<std::size_t>(audio.sample_rate / f0_max);
  const auto lag_max = static_cast<std::size_t>(audio.sample_rate / f0_min);
  std::vector<double> c(lag_max + 2, 0.0);
  for (std::size_t lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t i = start; i < start + len && i + lag < n; ++i) {
      xy += audio.samples[i] * audio.samples[i + lag];
      xx += audio.samples[i] * audio.samples[i];
      yy += audio.samples[i + lag] * audio.samples[i + lag];
    }
    c[lag] = xx > 0.0 && yy > 0.0 ? xy / std::sqrt(xx * yy) : 0.0;
  }
  double peak = 0.0;
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) peak = std::max(peak, c[lag]);
  // Shortest lag at a local maximum close to the global one; multiples of
  // the period score almost as high on clean periodic signals.
  std::size_t best = lag_min;
  for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
    if (c[lag] >= 0.9 * peak && c[lag] >= c[lag - 1] && c[lag] >= c[lag + 1]) {
      best = lag;
      break;
    }
  }
  const double denom = c[best - 1] - 2.0 * c[best] + c[best + 1];
  const double shift = denom != 0.0 ? 0.5 * (c[best - 1] - c[best + 1]) / denom : 0.0;
  return audio.sample_rate / (static_cast<double>(best) + shift);
}

LpcCoefficients random_stable_lpc(Rng& rng) {
  std::vector<double> poly{1.0};
  for (std::size_t k = 0; k < kLpcOrder / 2; ++k) {
    const double r = rng.uniform(0.3, 0.98);
    const double th = rng.uniform(0.05, std::numbers::pi - 0.05);
    const std::array<double, 3> q{1.0, -2.0 * r * std::cos(th), r * r};
    std::vector<double> next(poly.size() + 2, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (std::size_t j = 0; j < 3; ++j) next[i + j] += poly[i] * q[j];
    poly = std::move(next);
  }
  LpcCoefficients a{};
  for (std::size_t k = 0; k < kLpcOrder; ++k) a[k] = poly[k + 1];
  return a;
}

LinguisticRep rep_from_words(const std::vector<std::string>& words, const std::vector<std::string>& tags) {
  std::vector<std::vector<Syllable>> prons;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (is_punctuation(words[i])) continue;
    auto p = lookup(words[i], tags[i], lexicon());
    if (!p) throw std::runtime_error("not in lexicon: " + words[i]);
    prons.push_back(*p);
  }
  return build_rep(words, tags, prons);
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace nts::test
