#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nts/lexicon.hpp"
#include "nts/phonology.hpp"

namespace nts {

/// Rep for one sentence. `tokens` may contain punctuation, which marks the
/// boundary after the preceding word: ',' phrase, ';' and ':' clause,
/// '.', '!' and '?' sentence. The last word always closes the sentence.
/// `prons` holds one pronunciation per word token, in order.
LinguisticRep build_rep(const Sentence& tokens, const std::vector<std::string>& tags,
                        const std::vector<std::vector<Syllable>>& prons);

/// Surface rep: each word's phones replaced by `surface[w]`, a per-lexical-
/// phone list of symbols where kDeletionSymbol drops the phone. A deleted
/// nucleus is kept; syllable structure follows the lexical one.
LinguisticRep apply_surface(const LinguisticRep& rep, const std::vector<std::vector<std::string>>& surface);

// ---------------------------------------------------------------------------
// Labeled corpus files.
//
// Utterances are separated by blank lines; '#' starts a comment. An optional
// line "@ <file.wav>" names the utterance audio (relative to the label file).
// Every other line is one word, tab separated:
//
//   orthography  POS  pronunciation  boundary  surface  durations
//
// boundary is w, p, c or s (the coarsest boundary after the word). surface
// gives one symbol per lexical phone separated by '-', using "eps" for a
// deletion, or '*' when unknown. durations lists milliseconds per lexical
// phone separated by spaces, or '*' when unknown.

struct LabeledWord {
  std::string orthography;
  std::string pos;
  std::vector<Syllable> pronunciation;
  std::uint8_t boundary_after = kWordBoundary;
  std::optional<std::vector<std::string>> surface;
  std::optional<std::vector<double>> durations;
};

struct LabeledUtterance {
  std::string audio;  // empty when there is none
  std::vector<LabeledWord> words;

  /// Lexical rep with content flags, prominence and accents filled in.
  LinguisticRep rep() const;
  bool has_surface() const;
  bool has_durations() const;
  /// Surface symbols per word; requires has_surface().
  std::vector<std::vector<std::string>> surface() const;
  /// Durations of every lexical phone in order; requires has_durations().
  std::vector<double> durations() const;
};

std::vector<LabeledUtterance> parse_labels(std::string_view text, const FeatureSystem& fs,
                                           const std::string& source = "<memory>");
std::vector<LabeledUtterance> load_labels(const std::filesystem::path& path, const FeatureSystem& fs);
std::string format_labels(const std::vector<LabeledUtterance>& utterances);
void save_labels(const std::filesystem::path& path, const std::vector<LabeledUtterance>& utterances);

/// Labeled utterance from a lexical rep (surface and durations unset).
LabeledUtterance to_labeled(const LinguisticRep& rep);

}  // namespace nts
