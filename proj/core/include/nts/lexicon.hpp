#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nts/phonology.hpp"

namespace nts {

// ---------------------------------------------------------------------------
// Text preprocessing

using Sentence = std::vector<std::string>;

/// Lowercased word tokens grouped into sentences. Terminal punctuation
/// (. ! ?) ends a sentence and is kept as a token, as are the phrase and
/// clause cues , ; :. Digit runs are spelled out as number words; any other
/// symbol is dropped.
std::vector<Sentence> tokenize(std::string_view text);

/// Space-joined tokens; tokenize(render(tokenize(x))) == tokenize(x).
std::string render(const std::vector<Sentence>& sentences);

/// "123" -> {"one", "hundred", "twenty", "three"}.
std::vector<std::string> number_words(std::uint64_t n);

bool is_punctuation(std::string_view token);

// ---------------------------------------------------------------------------
// Lexicon

struct LexVariant {
  std::vector<std::string> tags;
  std::vector<Syllable> pronunciation;
};

struct LexEntry {
  std::string orthography;
  std::vector<LexVariant> variants;  // file order
};

/// Orthography -> POS-conditioned pronunciations. TSV rows:
/// `orthography<TAB>POS[,POS...]<TAB>pronunciation`, '#' starts a comment.
class Lexicon {
 public:
  static Lexicon parse(std::string_view text, const FeatureSystem& fs, const std::string& source = "<memory>");
  static Lexicon load(const std::filesystem::path& path, const FeatureSystem& fs);

  /// Adds a row; rejects a duplicate (orthography, tag) pair. A row whose
  /// pronunciation equals an existing variant's joins that variant.
  void add(const std::string& orthography, const std::vector<std::string>& tags,
           std::vector<Syllable> pronunciation);

  const LexEntry* find(std::string_view orthography) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, LexEntry, std::less<>>& entries() const { return entries_; }
  /// Union of the tags of every variant of the word, in first-seen order.
  std::vector<std::string> tags_for(std::string_view orthography) const;

 private:
  std::map<std::string, LexEntry, std::less<>> entries_;
};

/// Pronunciation of the variant whose tag set contains `tag`, else the first
/// variant; nullopt when the word is absent.
std::optional<std::vector<Syllable>> lookup(std::string_view token, std::string_view tag, const Lexicon& lex);

/// Sets the content flag, prominence and pitch accents of a word from its
/// POS tag. Content words carry an accent on their primary-stressed syllable.
void annotate_word(Word& word);
bool is_content_tag(std::string_view tag);

// ---------------------------------------------------------------------------
// Part-of-speech tagging

using TaggedSentence = std::vector<std::pair<std::string, std::string>>;

/// One sentence per line of whitespace-separated `token/TAG` items.
std::vector<TaggedSentence> parse_tagged_corpus(std::string_view text, const std::string& source = "<memory>");
std::vector<TaggedSentence> load_tagged_corpus(const std::filesystem::path& path);

/// Bigram HMM with add-k smoothing on transitions and emissions.
class TagModel {
 public:
  static constexpr double kDefaultSmoothing = 0.1;

  const std::vector<std::string>& tags() const { return tags_; }
  std::optional<std::size_t> tag_index(std::string_view tag) const;
  double smoothing() const { return k_; }

  /// Count of `to` following `from` (nullopt = sentence start).
  double transition_count(std::optional<std::size_t> from, std::size_t to) const;
  /// log P(to | from), smoothed; rows sum to one.
  double transition_logprob(std::optional<std::size_t> from, std::size_t to) const;
  double emission_count(std::string_view word, std::size_t tag) const;

  /// Tags a word may take: corpus tags plus lexicon tags; empty when unknown.
  std::vector<std::size_t> allowed_tags(std::string_view word, const Lexicon* lex) const;
  /// Tags assumed for a word with no known tags.
  std::vector<std::size_t> open_class_tags() const;
  /// log P(word | tag); -inf when `tag` is not allowed for the word. Unknown
  /// words are uniform over the open-class tags.
  double emission_logprob(std::string_view word, std::size_t tag, const Lexicon* lex) const;

  /// Lexicon tags missing from the model's tag set.
  std::vector<std::string> missing_tags(const Lexicon& lex) const;

  std::string serialize() const;
  static TagModel parse(std::string_view text, const std::string& source = "<memory>");
  void save(const std::filesystem::path& path) const;
  static TagModel load(const std::filesystem::path& path);

  friend TagModel train_tagger(const std::vector<TaggedSentence>& corpus, double smoothing);

 private:
  std::size_t add_tag(const std::string& tag);

  double k_ = kDefaultSmoothing;
  std::vector<std::string> tags_;
  // transitions_[from + 1][to]; row 0 is the sentence start.
  std::vector<std::vector<double>> transitions_;
  std::map<std::string, std::map<std::size_t, double>, std::less<>> emissions_;
  std::vector<double> tag_totals_;
};

/// Tallies the corpus; empty corpus is an error.
TagModel train_tagger(const std::vector<TaggedSentence>& corpus, double smoothing = TagModel::kDefaultSmoothing);

/// Viterbi-optimal tags; ties go to the lower tag index. With a lexicon the
/// candidate tags of known words include their lexicon tags.
std::vector<std::string> pos_tag(const Sentence& tokens, const TagModel& model, const Lexicon* lex = nullptr);

}  // namespace nts
