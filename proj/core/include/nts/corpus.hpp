#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nts/labels.hpp"
#include "nts/lexicon.hpp"
#include "nts/random.hpp"
#include "nts/vocoder.hpp"

namespace nts {

/// Reps for `count` sentences drawn (with replacement) from a tagged corpus,
/// keeping only sentences whose words are all in the lexicon.
std::vector<LinguisticRep> sample_reps(const std::vector<TaggedSentence>& corpus, const Lexicon& lex,
                                       std::size_t count, Rng& rng);

/// Connected-speech and accent rules used to build the postlexical corpus,
/// one output symbol per lexical phone (deletions as kDeletionSymbol). The
/// rules look only at phones, stress and word/phrase boundaries:
///  - t/d between a vowel and an unstressed vowel in one phrase -> [dx];
///  - word-final t/d after a consonant, before a consonant in the phrase, is
///    deleted; word-final p/t/k after a vowel in that position -> [q];
///  - unstressed vowels reduce to [ax] ([iy] to [ih]);
///  - low back merger, [ay] monophthong except before voiceless obstruents,
///    closed [ey]/[ow] -> [eh]/[ah], [eh]/[ae] raised before nasals;
///  - non-prevocalic [r] dropped, non-prevocalic [l] -> [w];
///  - [dh]/[th] stopped, unstressed final [ng] -> [n];
///  - nasal place assimilation, final voicing assimilation, intervocalic
///    [s] -> [z], [hh] dropped from short phrase-medial words.
std::vector<std::vector<std::string>> flapping_surface(const LinguisticRep& rep, const FeatureSystem& fs);

/// Inherent and minimum durations (ms) of a phone, by class.
struct PhoneTiming {
  double inherent;
  double minimum;
};
PhoneTiming phone_timing(std::string_view phone, const FeatureSystem& fs);

/// Rule-generated durations: MIN + (INH - MIN) * product of context
/// factors, plus Gaussian noise of `noise_ms`, floored at 20 ms and rounded
/// to 0.01 ms.
std::vector<double> klatt_durations(const LinguisticRep& rep, const FeatureSystem& fs, Rng& rng,
                                    double noise_ms = 2.0);

/// Source-filter formant synthesizer driven by phone classes and durations.
AudioBuffer render_formants(const LinguisticRep& rep, std::span<const double> durations_ms, const FeatureSystem& fs,
                            Rng& rng, int sample_rate = 16000);

std::vector<LabeledUtterance> gen_flapping_corpus(const std::vector<TaggedSentence>& corpus, const Lexicon& lex,
                                                  const FeatureSystem& fs, std::uint64_t seed, std::size_t size);
std::vector<LabeledUtterance> gen_duration_corpus(const std::vector<TaggedSentence>& corpus, const Lexicon& lex,
                                                  const FeatureSystem& fs, std::uint64_t seed, std::size_t size);

struct AudioCorpus {
  std::vector<LabeledUtterance> labels;  // audio names "utt0000.wav", ...
  std::vector<AudioBuffer> audio;
};
AudioCorpus gen_vowel_corpus(const std::vector<TaggedSentence>& corpus, const Lexicon& lex, const FeatureSystem& fs,
                             std::uint64_t seed, std::size_t size);

/// Writes `labels` into `label_file` and each buffer next to it.
void save_audio_corpus(const AudioCorpus& corpus, const std::filesystem::path& label_file);

/// Percent of lexical phones left unchanged in a corpus with surface labels.
double identity_rate(const std::vector<LabeledUtterance>& corpus);

}  // namespace nts
