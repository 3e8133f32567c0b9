#include "nts/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "binary_io.hpp"
#include "nts/error.hpp"
#include "text_util.hpp"

namespace nts {

namespace {

constexpr char kCacheMagic[8] = {'N', 'T', 'S', 'F', 'R', 'M', '0', '1'};

double scaled_distance(int d) { return std::min(d, 10) / 10.0; }

}  // namespace

FrameVector normalize_frame(const FrameParams& f, const VocoderConfig& cfg) {
  FrameVector v{};
  v[0] = f.f0 / 400.0;
  v[1] = (f.power + 100.0) / 100.0;
  v[2] = f.boundary_freq / cfg.nyquist();
  v[3] = f.f0 > 0.0 ? 1.0 : 0.0;
  for (std::size_t k = 0; k < kLpcOrder; ++k) v[4 + k] = f.lsf[k] / std::numbers::pi;
  return v;
}

FrameParams denormalize_frame(std::span<const double> v, const VocoderConfig& cfg) {
  if (v.size() != kFrameVectorSize) throw InvalidInput("denormalize_frame: expected 14 values");
  FrameParams f;
  f.f0 = v[0] * 400.0;
  f.power = v[1] * 100.0 - 100.0;
  f.boundary_freq = v[2] * cfg.nyquist();
  if (!(v[3] >= 0.5)) f.boundary_freq = 0.0;
  for (std::size_t k = 0; k < kLpcOrder; ++k) f.lsf[k] = v[4 + k] * std::numbers::pi;
  return clamp_frame(f, cfg);
}

std::size_t frame_count(std::span<const double> durations_ms) {
  double total = 0.0;
  for (double d : durations_ms) total += d;
  return static_cast<std::size_t>(std::llround(total / kFrameMs));
}

std::size_t acoustic_base_input_size(const FeatureSystem& fs) {
  return (2 * kAcousticContext + 1) * phone_encoding_size(fs) + 3 + 2 * kBoundaryLevels;
}

std::size_t acoustic_input_size(const FeatureSystem& fs) {
  return acoustic_base_input_size(fs) + kAcousticFeedback * kFrameVectorSize;
}

FrameEncoder::FrameEncoder(const LinguisticRep& rep, std::span<const double> durations_ms, const FeatureSystem& fs)
    : durations_(durations_ms.begin(), durations_ms.end()), base_size_(acoustic_base_input_size(fs)) {
  const auto refs = flatten(rep);
  if (refs.size() != durations_.size())
    throw InvalidInput("acoustic encoding: " + std::to_string(durations_.size()) + " durations for " +
                       std::to_string(refs.size()) + " phones");
  const auto dist = boundary_distances(rep);
  std::vector<std::vector<double>> enc;
  for (const auto& r : refs) enc.push_back(phone_encoding(phone_at(rep, r), fs));
  const std::vector<double> pad(phone_encoding_size(fs), 0.0);
  double t = 0.0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (!(durations_[i] > 0.0)) throw InvalidInput("acoustic encoding: durations must be positive");
    // Current phone first, then the context window without it.
    std::vector<double> v = enc[i];
    for (std::ptrdiff_t o = -static_cast<std::ptrdiff_t>(kAcousticContext);
         o <= static_cast<std::ptrdiff_t>(kAcousticContext); ++o) {
      if (o == 0) continue;
      const auto j = static_cast<std::ptrdiff_t>(i) + o;
      const auto& e = (j < 0 || j >= static_cast<std::ptrdiff_t>(enc.size())) ? pad : enc[static_cast<std::size_t>(j)];
      v.insert(v.end(), e.begin(), e.end());
    }
    v.push_back(0.0);  // fractional position, filled per frame
    v.push_back(std::log(durations_[i] / 100.0));
    const int stress = rep.words[refs[i].word].syllables[refs[i].syllable].stress;
    v.push_back(stress == 1 ? 1.0 : stress == 2 ? 0.5 : 0.0);
    for (std::size_t l = 0; l < kBoundaryLevels; ++l) v.push_back(scaled_distance(dist[i].previous[l]));
    for (std::size_t l = 0; l < kBoundaryLevels; ++l) v.push_back(scaled_distance(dist[i].next[l]));
    phone_part_.push_back(std::move(v));
    starts_.push_back(t);
    t += durations_[i];
  }
  frames_ = frame_count(durations_);
}

std::pair<std::size_t, double> FrameEncoder::locate(std::size_t frame) const {
  if (frame >= frames_) throw InvalidInput("frame index " + std::to_string(frame) + " out of range");
  const double t = (static_cast<double>(frame) + 0.5) * kFrameMs;
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  std::size_t i = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
  const double pos = std::clamp((t - starts_[i]) / durations_[i], 0.0, 1.0);
  return {i, pos};
}

std::vector<double> FrameEncoder::encode(std::size_t frame, std::span<const FrameVector> previous) const {
  const auto [i, pos] = locate(frame);
  std::vector<double> v;
  v.reserve(base_size_ + kAcousticFeedback * kFrameVectorSize);
  v = phone_part_[i];
  v[base_size_ - 3 - 2 * kBoundaryLevels] = pos;
  for (std::size_t k = 0; k < kAcousticFeedback; ++k) {
    if (k < previous.size()) v.insert(v.end(), previous[k].begin(), previous[k].end());
    else v.insert(v.end(), kFrameVectorSize, 0.0);
  }
  return v;
}

std::vector<double> encode_frame_input(const LinguisticRep& rep, std::span<const double> durations_ms,
                                       std::size_t frame, std::span<const FrameVector> previous,
                                       const FeatureSystem& fs) {
  return FrameEncoder(rep, durations_ms, fs).encode(frame, previous);
}

std::vector<Sample> build_frame_dataset(std::span<const AcousticExample> examples, const FeatureSystem& fs,
                                        const VocoderConfig& cfg) {
  std::vector<Sample> out;
  for (const auto& ex : examples) {
    const FrameEncoder enc(ex.rep, ex.durations, fs);
    const auto targets = analyze(ex.audio, cfg);
    if (enc.frames() > targets.size())
      throw DataError("segmentation covers " + std::to_string(enc.frames()) + " frames but the audio has " +
                      std::to_string(targets.size()));
    std::vector<FrameVector> history;  // newest first
    for (std::size_t f = 0; f < enc.frames(); ++f) {
      const auto t = normalize_frame(targets[f], cfg);
      out.push_back({enc.encode(f, history), std::vector<double>(t.begin(), t.end())});
      history.insert(history.begin(), t);
      if (history.size() > kAcousticFeedback) history.pop_back();
    }
  }
  return out;
}

Network make_acoustic_network(const FeatureSystem& fs, std::size_t hidden, const TrainConfig& cfg) {
  return make_network({acoustic_input_size(fs), hidden, kFrameVectorSize}, Activation::Tanh, Activation::Linear, cfg,
                      kAcousticFeedback);
}

std::vector<FrameParams> generate_frames(const LinguisticRep& rep, std::span<const double> durations_ms,
                                         const Network& net, const FeatureSystem& fs, const VocoderConfig& cfg) {
  if (net.input_size() != acoustic_input_size(fs) || net.output_size() != kFrameVectorSize)
    throw ModelError("acoustic net does not match the encoding");
  const FrameEncoder enc(rep, durations_ms, fs);
  std::vector<FrameParams> out;
  out.reserve(enc.frames());
  std::vector<FrameVector> history;
  for (std::size_t f = 0; f < enc.frames(); ++f) {
    const auto y = forward(net, enc.encode(f, history));
    const auto frame = denormalize_frame(y, cfg);
    out.push_back(frame);
    history.insert(history.begin(), normalize_frame(frame, cfg));
    if (history.size() > kAcousticFeedback) history.pop_back();
  }
  return out;
}

void save_frame_dataset(const std::filesystem::path& path, std::span<const Sample> samples) {
  detail::ByteWriter w;
  w.raw(kCacheMagic, sizeof kCacheMagic);
  w.u32(kFrameCacheVersion);
  const std::size_t in = samples.empty() ? 0 : samples[0].input.size();
  const std::size_t tg = samples.empty() ? 0 : samples[0].target.size();
  w.u64(in);
  w.u64(tg);
  w.u64(samples.size());
  for (const auto& s : samples) {
    if (s.input.size() != in || s.target.size() != tg) throw InvalidInput("frame dataset: ragged samples");
    for (double v : s.input) w.f64(v);
    for (double v : s.target) w.f64(v);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<Sample> load_frame_dataset(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  detail::ByteReader<DataError> r(std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
  char magic[8];
  r.raw(magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kCacheMagic)) throw DataError(path.string() + ": not a frame dataset cache");
  const auto version = r.u32();
  if (version != kFrameCacheVersion)
    throw DataError(path.string() + ": frame cache version " + std::to_string(version) + " is not supported");
  const auto in = r.u64(), tg = r.u64(), n = r.u64();
  if (n != 0 && r.remaining() / 8 / n < in + tg) throw DataError(path.string() + ": truncated frame cache");
  std::vector<Sample> out(n);
  for (auto& s : out) {
    s.input.resize(in);
    s.target.resize(tg);
    for (auto& v : s.input) v = r.f64();
    for (auto& v : s.target) v = r.f64();
  }
  if (!r.done()) throw DataError(path.string() + ": trailing bytes in frame cache");
  return out;
}

}  // namespace nts
