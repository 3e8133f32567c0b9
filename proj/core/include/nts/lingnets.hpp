#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nts/align.hpp"
#include "nts/lexicon.hpp"
#include "nts/nn.hpp"
#include "nts/phonology.hpp"

namespace nts {

inline constexpr std::size_t kLingWindowRadius = 4;  // nine-symbol windows

/// Output classes of the letter-to-sound net: lexical phones, the deletion
/// class and the two-phone composites, in that order.
class G2PAlphabet {
 public:
  explicit G2PAlphabet(const FeatureSystem& fs);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t cls) const { return names_.at(cls); }
  std::size_t deletion() const { return deletion_; }
  std::optional<std::size_t> find(std::string_view name) const;
  /// Phones a class stands for: none for the deletion class, two for a composite.
  const std::vector<std::string>& expansion(std::size_t cls) const { return expansions_.at(cls); }
  /// Composite class for the phone pair, if one exists.
  std::optional<std::size_t> composite(std::string_view first, std::string_view second) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> expansions_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t deletion_ = 0;
};

/// 26-way letter identity followed by letter_features.
std::size_t letter_encoding_size(const FeatureSystem& fs);
std::vector<double> letter_encoding(char letter, const FeatureSystem& fs);
std::size_t g2p_input_size(const FeatureSystem& fs);
/// Letters of `word` reduced to a-z (other characters are dropped).
std::string g2p_letters(std::string_view word);
/// Windowed inputs, one per letter of g2p_letters(word).
std::vector<std::vector<double>> g2p_inputs(std::string_view word, const FeatureSystem& fs);

/// Per-letter classes for a word aligned to its phones under `cm`, or
/// nullopt when the alignment costs more than 1.5 x max(length) or an
/// inserted phone cannot be folded into a composite.
std::optional<std::vector<std::size_t>> align_letters(std::string_view letters, const std::vector<std::string>& phones,
                                                      const G2PAlphabet& alphabet, const CostModel& cm);

struct G2PDataset {
  std::vector<Sample> samples;  // one per letter, one-hot targets
  std::vector<std::string> words;
  std::vector<std::string> skipped;
};

/// One sample per letter of every alignable (word, pronunciation) pair of
/// the lexicon, in lexicon order. `limit` caps the number of words used.
G2PDataset build_g2p_dataset(const Lexicon& lex, const FeatureSystem& fs, const CostModel& cm,
                             std::size_t limit = static_cast<std::size_t>(-1));

Network make_g2p_network(const FeatureSystem& fs, std::size_t hidden, const TrainConfig& cfg);

/// Per-letter argmax classes.
std::vector<std::size_t> g2p_classes(std::string_view word, const Network& net, const FeatureSystem& fs);
/// Phones of the argmax classes with deletions dropped and composites
/// expanded. Empty input gives an empty result; a word whose letters all
/// map to the deletion class throws ModelError.
std::vector<std::string> g2p_predict(std::string_view word, const Network& net, const FeatureSystem& fs);
/// Syllabified prediction for use in a rep.
std::vector<Syllable> g2p_pronounce(std::string_view word, const Network& net, const FeatureSystem& fs);

/// Fraction of samples whose argmax equals the target class.
double classification_accuracy(const Network& net, std::span<const Sample> samples);

// ---------------------------------------------------------------------------
// Postlexical net

/// Output classes: every postlexical phone (deletion included), in inventory order.
class PostlexAlphabet {
 public:
  explicit PostlexAlphabet(const FeatureSystem& fs);
  std::size_t size() const { return symbols_.size(); }
  const std::string& symbol(std::size_t cls) const { return symbols_.at(cls); }
  std::optional<std::size_t> find(std::string_view symbol) const;
  std::size_t deletion() const { return deletion_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t deletion_ = 0;
};

/// Per phone: phone encoding plus a stress value (1 primary, 0.5 secondary).
std::size_t postlex_slot_size(const FeatureSystem& fs);
/// Nine-phone window plus distances to the previous and next word, phrase,
/// clause and sentence boundary, each min(d, 10) / 10.
std::size_t postlex_input_size(const FeatureSystem& fs);
std::vector<std::vector<double>> postlex_inputs(const LinguisticRep& rep, const FeatureSystem& fs);

struct PostlexExample {
  LinguisticRep rep;
  std::vector<std::vector<std::string>> surface;  // per word, any length
};

struct PostlexDataset {
  std::vector<Sample> samples;
  /// Lexical and reference symbols per sample, for metrics.
  std::vector<std::string> lexical;
  std::vector<std::string> reference;
  std::size_t skipped = 0;
};

/// Aligns each word's lexical phones with its surface phones under
/// phone_phone_cost and emits one sample per lexical phone. Utterances with
/// an inserted phone or an alignment above 1.5 x max(length) are skipped.
PostlexDataset build_postlex_dataset(std::span<const PostlexExample> examples, const FeatureSystem& fs);

/// Surface symbol per lexical phone for one word (deletions as
/// kDeletionSymbol), or nullopt when unalignable. A surface list of the
/// same length that already contains kDeletionSymbol is taken as given.
std::optional<std::vector<std::string>> align_surface(const std::vector<std::string>& lexical,
                                                      const std::vector<std::string>& surface,
                                                      const FeatureSystem& fs);

Network make_postlex_network(const FeatureSystem& fs, std::size_t hidden, const TrainConfig& cfg);
/// Softmax net with no hidden layer that copies the centre phone.
Network identity_postlex_network(const FeatureSystem& fs);

/// Predicted symbol for every lexical phone, grouped by word; deletions
/// appear as kDeletionSymbol.
std::vector<std::vector<std::string>> postlex_classes(const LinguisticRep& rep, const Network& net,
                                                      const FeatureSystem& fs);
/// Surface pronunciation per word with deletions removed.
std::vector<std::vector<std::string>> postlex_predict(const LinguisticRep& rep, const Network& net,
                                                      const FeatureSystem& fs);

struct PostlexMetrics {
  double identity_baseline = 0.0;  // percent of slots where reference == lexical
  double accuracy = 0.0;           // percent of slots where prediction == reference
  std::size_t slots = 0;
};

/// Slot-wise comparison; all three lists must have equal length.
PostlexMetrics postlex_metrics(const std::vector<std::string>& predictions, const std::vector<std::string>& references,
                               const std::vector<std::string>& lexical);

}  // namespace nts
