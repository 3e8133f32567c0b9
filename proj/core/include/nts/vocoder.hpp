#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nts {

inline constexpr std::size_t kLpcOrder = 10;
inline constexpr double kSilenceFloorDb = -100.0;
/// Smallest LSF spacing produced by clamp_frame (radians).
inline constexpr double kMinLsfGap = 1e-3;

using LpcCoefficients = std::array<double, kLpcOrder>;  // a1..a10 of A(z) = 1 + sum a_k z^-k
using LineSpectrum = std::array<double, kLpcOrder>;

/// One 10 ms vocoder frame.
struct FrameParams {
  double f0 = 0.0;             // Hz; 0 only for fully unvoiced frames
  double power = kSilenceFloorDb;  // dB re full scale
  double boundary_freq = 0.0;  // Hz; voiced below, noise above
  LineSpectrum lsf{};          // radians, strictly increasing in (0, pi)

  bool operator==(const FrameParams&) const = default;
};
/// Values per frame in dumps and network targets: the 13 parameters plus a
/// voicing flag (1 when f0 > 0).
inline constexpr std::size_t kFrameVectorSize = 4 + kLpcOrder;

struct AudioBuffer {
  int sample_rate = 16000;
  std::vector<double> samples;  // mono, [-1, 1]

  double duration_ms() const { return 1000.0 * static_cast<double>(samples.size()) / sample_rate; }
};

struct VocoderConfig {
  int sample_rate = 16000;
  double frame_ms = 10.0;
  double window_ms = 25.0;
  double f0_min = 50.0;
  double f0_max = 400.0;
  double voicing_threshold = 0.5;  // normalized autocorrelation at the pitch lag
  std::size_t bands = 4;
  std::size_t fir_taps = 65;
  double filter_update_hz = 50.0;
  double preemphasis = 0.7;   // LPC is fitted to x[n] - mu x[n-1]; synthesis undoes it
  std::size_t subframes = 4;  // 2.5 ms interpolation steps
  std::uint64_t noise_seed = 0x6e6f697365ULL;

  std::size_t frame_samples() const { return static_cast<std::size_t>(sample_rate * frame_ms / 1000.0 + 0.5); }
  std::size_t window_samples() const { return static_cast<std::size_t>(sample_rate * window_ms / 1000.0 + 0.5); }
  double nyquist() const { return sample_rate / 2.0; }
};

/// Reason the frame breaks an invariant, or nullopt when it is valid.
std::optional<std::string> frame_violation(const FrameParams& f, double nyquist);

/// Forces a frame into the valid range: finite values, f0 within
/// [f0_min, f0_max] for voiced frames (boundary below 100 Hz means
/// unvoiced), power within [floor, 0] dB, LSFs sorted with at least
/// `min_gap` between neighbours and the ends of (0, pi).
FrameParams clamp_frame(FrameParams f, const VocoderConfig& cfg = {}, double min_gap = kMinLsfGap);

/// Uniform spectrum, the LSFs of A(z) = 1.
LineSpectrum flat_lsf();

// --- LPC ---------------------------------------------------------------------

/// Autocorrelation r[0..order] of `x`.
std::vector<double> autocorrelation(std::span<const double> x, std::size_t order);
/// Levinson-Durbin recursion; returns a1..ap and writes the final prediction
/// error. r[0] == 0 yields all-zero coefficients.
std::vector<double> levinson_durbin(std::span<const double> r, std::size_t order, double* error = nullptr);
/// Reflection coefficients by step-down; |k| < 1 for all k iff A(z) is
/// minimum phase.
std::vector<double> reflection_coefficients(std::span<const double> a);

/// Roots of the sum and difference polynomials located on a 512-point grid
/// (refined to denser grids if roots share a cell) and bisected. Throws
/// InvalidInput when the filter is not minimum phase.
LineSpectrum lpc_to_lsf(const LpcCoefficients& a);
/// Rebuilds A(z) from the product form; throws InvalidInput unless the LSFs
/// are strictly increasing inside (0, pi).
LpcCoefficients lsf_to_lpc(const LineSpectrum& lsf);

/// 20 log10 |1 / A(e^jw)| plus the gain term 10 log10(gain).
double lpc_envelope_db(const LpcCoefficients& a, double gain, double omega);

// --- analysis / synthesis ------------------------------------------------------

/// Frame i is centred on sample i * hop + hop / 2. Needs at least one
/// analysis window of audio.
std::vector<FrameParams> analyze(const AudioBuffer& audio, const VocoderConfig& cfg = {});

/// Mixed-excitation synthesis, frame_samples() output samples per frame.
/// Throws InvalidInput on an invalid frame.
AudioBuffer synthesize(std::span<const FrameParams> frames, const VocoderConfig& cfg = {});

/// Samples are passed through this after synthesis: identity up to 0.9,
/// then a tanh knee that approaches 1 and never exceeds it.
double soft_clip(double x);

/// Linear-phase windowed-sinc lowpass (Hamming), unit DC gain. Cutoff at or
/// above Nyquist gives a delayed impulse, cutoff <= 0 all zeros.
std::vector<double> design_lowpass(double cutoff_hz, std::size_t taps, int sample_rate);

// --- frame dumps ---------------------------------------------------------------

/// Text: one frame per line, 14 fields "f0 power boundary voiced lsf0..lsf9"
/// where voiced is 0/1 and must agree with f0 > 0; '#' starts a comment.
void write_frames(std::ostream& out, std::span<const FrameParams> frames);
void write_frames(const std::filesystem::path& path, std::span<const FrameParams> frames);
std::vector<FrameParams> read_frames(std::istream& in, const std::string& source = "<stream>");
std::vector<FrameParams> read_frames(const std::filesystem::path& path);

}  // namespace nts
