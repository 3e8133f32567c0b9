#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "nts/nn.hpp"
#include "nts/phonology.hpp"
#include "nts/vocoder.hpp"

namespace nts {

inline constexpr std::size_t kAcousticFeedback = 4;
inline constexpr std::size_t kAcousticContext = 2;
inline constexpr double kFrameMs = 10.0;

using FrameVector = std::array<double, kFrameVectorSize>;

/// Network-space frame: f0 / 400, (power + 100) / 100, boundary / Nyquist,
/// voicing flag, lsf / pi.
FrameVector normalize_frame(const FrameParams& f, const VocoderConfig& cfg = {});
/// Inverse of normalize_frame followed by clamp_frame; a voicing value
/// below 0.5 gives an unvoiced frame.
FrameParams denormalize_frame(std::span<const double> v, const VocoderConfig& cfg = {});

/// round(sum(durations) / 10 ms).
std::size_t frame_count(std::span<const double> durations_ms);

/// Per frame: current phone encoding, the encodings of two phones either
/// side (zero padded), fractional position in the phone, ln(duration / 100
/// ms), syllable stress, the eight scaled boundary distances, then the
/// `kAcousticFeedback` previous normalized frames, newest first (zeros
/// before the start).
std::size_t acoustic_base_input_size(const FeatureSystem& fs);
std::size_t acoustic_input_size(const FeatureSystem& fs);

/// Frame-invariant part of the encoding, precomputed for one utterance.
class FrameEncoder {
 public:
  FrameEncoder(const LinguisticRep& rep, std::span<const double> durations_ms, const FeatureSystem& fs);

  std::size_t frames() const { return frames_; }
  /// Phone index and fractional position of the frame centre.
  std::pair<std::size_t, double> locate(std::size_t frame) const;
  /// `previous` holds up to kAcousticFeedback normalized frames, newest first.
  std::vector<double> encode(std::size_t frame, std::span<const FrameVector> previous) const;

 private:
  std::vector<std::vector<double>> phone_part_;  // per phone, everything but position and feedback
  std::vector<double> starts_;
  std::vector<double> durations_;
  std::size_t frames_ = 0;
  std::size_t base_size_ = 0;
};

std::vector<double> encode_frame_input(const LinguisticRep& rep, std::span<const double> durations_ms,
                                       std::size_t frame, std::span<const FrameVector> previous,
                                       const FeatureSystem& fs);

struct AcousticExample {
  LinguisticRep rep;             // surface phones
  std::vector<double> durations;  // ms per phone
  AudioBuffer audio;
};

/// One sample per frame with teacher-forced feedback; targets come from
/// analyze(). Throws DataError when the segmentation outlasts the audio.
std::vector<Sample> build_frame_dataset(std::span<const AcousticExample> examples, const FeatureSystem& fs,
                                        const VocoderConfig& cfg = {});

Network make_acoustic_network(const FeatureSystem& fs, std::size_t hidden, const TrainConfig& cfg);

/// Frames generated with the net's own previous outputs as feedback; every
/// frame is clamped to the valid range.
std::vector<FrameParams> generate_frames(const LinguisticRep& rep, std::span<const double> durations_ms,
                                         const Network& net, const FeatureSystem& fs, const VocoderConfig& cfg = {});

// Frame dataset cache, little-endian: magic "NTSFRM01", u32 version, u64
// input size, u64 target size, u64 sample count, then per sample the input
// and target as f64.
inline constexpr std::uint32_t kFrameCacheVersion = 1;
void save_frame_dataset(const std::filesystem::path& path, std::span<const Sample> samples);
std::vector<Sample> load_frame_dataset(const std::filesystem::path& path);

}  // namespace nts
