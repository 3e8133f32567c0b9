#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nts/acoustic.hpp"
#include "nts/lexicon.hpp"
#include "nts/lingnets.hpp"
#include "nts/nn.hpp"
#include "nts/phonology.hpp"
#include "nts/prosody.hpp"
#include "nts/vocoder.hpp"

namespace nts {

/// Directory holding phones.txt, letters.txt, lexicon.tsv and
/// tagged_corpus.txt: $NTS_DATA_DIR, else the source tree, else the
/// install location.
std::filesystem::path default_data_dir();

struct NetBudget {
  std::size_t hidden = 0;
  std::size_t epochs = 0;
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
};

/// Everything one run needs. Text form is one `key = value` per line, '#'
/// comments, relative paths resolved against the config file's directory.
struct PipelineConfig {
  static constexpr int kVersion = 1;

  std::filesystem::path phones, letters, lexicon, tagged_corpus;
  std::filesystem::path tagger, g2p_weights, postlex_weights, duration_weights, acoustic_weights, duration_stats;
  std::filesystem::path flapping_corpus, duration_corpus, vowel_corpus;  // label files
  DurationMode duration_mode = DurationMode::ZScore;
  std::uint64_t seed = 1;

  std::size_t g2p_words = 500;
  std::size_t flapping_size = 400;
  std::size_t duration_size = 300;
  std::size_t vowel_size = 40;
  double holdout_fraction = 0.2;

  NetBudget g2p{64, 40, 0.05, 16};
  NetBudget postlex{32, 30, 0.05, 16};
  NetBudget duration{32, 60, 0.02, 16};
  NetBudget acoustic{48, 30, 0.01, 16};

  VocoderConfig vocoder;

  /// Data files from `data_dir`, every generated file inside `work_dir`.
  static PipelineConfig defaults(const std::filesystem::path& work_dir,
                                 const std::filesystem::path& data_dir = default_data_dir());
  /// Unknown keys and bad values raise ParseError; missing input data files
  /// (phones, letters, lexicon, tagged corpus) raise DataError.
  static PipelineConfig parse(std::string_view text, const std::filesystem::path& base_dir,
                              const std::string& source = "<memory>");
  static PipelineConfig load(const std::filesystem::path& path);
  /// Absolute paths; parse(serialize()) reproduces the config.
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;
};

/// Loaded language data and trained models.
struct Models {
  FeatureSystem fs;
  Lexicon lexicon;
  TagModel tagger;
  Network g2p, postlex, duration, acoustic;
  DurationStats stats;
  DurationMode mode = DurationMode::Log;
  VocoderConfig vocoder;

  /// ModelError when a model file is missing or does not fit the data.
  static Models load(const PipelineConfig& cfg);
};

// ---------------------------------------------------------------------------
// Training

enum class Stage { Tagger, G2P, Postlex, Duration, Acoustic };
std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);

struct Metric {
  std::string name;
  double value = 0.0;
};

struct TrainReport {
  Stage stage = Stage::Tagger;
  std::filesystem::path output;
  std::vector<Metric> metrics;
  double value(std::string_view name) const;
};

/// Trains one stage from the corpora named in `cfg` and writes its model
/// plus a "<model>.metrics" file of `name value` lines. Deterministic for a
/// given config.
TrainReport train_stage(Stage stage, const PipelineConfig& cfg);

enum class CorpusKind { Flapping, Durations, Vowels };
std::string_view to_string(CorpusKind k);
CorpusKind parse_corpus_kind(std::string_view s);

/// Writes the corpus to its configured path (vowels also write WAV files
/// next to the label file).
void generate_corpus(CorpusKind kind, const PipelineConfig& cfg);

/// Generates all three corpora, then trains every stage in order.
std::vector<TrainReport> train_all(const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Synthesis

struct WordTrace {
  std::string token;
  std::string tag;
  std::string source;   // "lexicon" or "g2p"
  std::string lexical;  // pronunciation string
  std::vector<std::string> surface;
};

struct SynthesisTrace {
  std::vector<std::string> tokens;
  std::vector<WordTrace> words;
  std::vector<std::string> phones;  // surface phones, utterance order
  std::vector<double> durations;    // ms per surface phone
  std::size_t frame_count = 0;
  double audio_ms = 0.0;

  double total_duration_ms() const;
  std::string format() const;
};

struct SayResult {
  AudioBuffer audio;
  std::vector<FrameParams> frames;
  SynthesisTrace trace;
};

/// Text to speech: tokenize, tag, look up (or letter-to-sound), postlexical
/// net, durations, frames, vocoder. All sentences form one utterance. An
/// error names the stage that raised it.
SayResult say(std::string_view text, const Models& models);

struct BenchReport {
  std::size_t sentences = 0;
  double audio_seconds = 0.0;
  double compute_seconds = 0.0;
  double real_time_factor() const { return audio_seconds > 0.0 ? compute_seconds / audio_seconds : 0.0; }
};

/// Synthesizes every non-empty line of `text` separately and times it.
BenchReport bench(std::string_view text, const Models& models);

}  // namespace nts
