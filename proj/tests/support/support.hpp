#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nts/lexicon.hpp"
#include "nts/phonology.hpp"
#include "nts/random.hpp"
#include "nts/vocoder.hpp"

namespace nts::test {

std::filesystem::path data_dir();
std::filesystem::path test_data_dir();

/// tests/data/oracles.json, parsed once.
const nlohmann::json& oracles();

const FeatureSystem& features();
const Lexicon& lexicon();
const std::vector<TaggedSentence>& tagged_corpus();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Pulse train at `f0` through two second-order resonators.
AudioBuffer two_formant_vowel(double f0, double seconds, double f1 = 700.0, double f2 = 1200.0,
                              int sample_rate = 16000);

/// RMS difference (dB) between the order-10 LPC envelopes of two signals,
/// averaged over 25 ms Hamming frames and sampled below `max_hz`. `test` is
/// first advanced by its cross-correlation delay (up to one 10 ms hop). Uses
/// its own autocorrelation and recursion, not the library's.
double lpc_log_spectral_distance(const AudioBuffer& ref, const AudioBuffer& test, double max_hz = 4000.0);

/// Autocorrelation pitch of the central half of the signal with parabolic
/// peak interpolation.
double estimate_f0(const AudioBuffer& audio, double f0_min = 50.0, double f0_max = 400.0);

/// Random minimum-phase order-10 filter built from random pole pairs.
LpcCoefficients random_stable_lpc(Rng& rng);

/// Lexical rep of one sentence from the lexicon, tagged with `tags`.
LinguisticRep rep_from_words(const std::vector<std::string>& words, const std::vector<std::string>& tags);

std::vector<unsigned char> read_bytes(const std::filesystem::path& path);

}  // namespace nts::test
