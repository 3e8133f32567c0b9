#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nts {

inline constexpr std::size_t kMaxFeatures = 64;
using FeatureSet = std::bitset<kMaxFeatures>;

/// Symbol used for a deleted phone in postlexical and letter-to-sound output.
inline constexpr std::string_view kDeletionSymbol = "eps";

struct Phone {
  std::string symbol;
  FeatureSet features;
  bool lexical = false;
  bool postlexical = false;
};

/// A letter realized as two phones (e.g. 'x' -> /k s/).
struct CompositePhone {
  std::string name;
  std::array<std::size_t, 2> phones{};
};

/// Phone inventory, feature definitions and the letter -> candidate phone
/// table. Immutable once built.
class FeatureSystem {
 public:
  /// Parses the phone table and letter table (formats documented in
  /// data/phones.txt and data/letters.txt).
  static FeatureSystem parse(std::string_view phones_text, std::string_view letters_text,
                             const std::string& source = "<memory>");
  static FeatureSystem load(const std::filesystem::path& phones_file,
                            const std::filesystem::path& letters_file);
  /// Loads phones.txt and letters.txt from a data directory.
  static FeatureSystem load_dir(const std::filesystem::path& data_dir);

  std::size_t size() const { return phones_.size(); }
  const Phone& phone(std::size_t id) const { return phones_.at(id); }
  const std::vector<Phone>& phones() const { return phones_; }
  std::optional<std::size_t> find(std::string_view symbol) const;
  /// Throws InvalidInput for an unknown symbol.
  std::size_t id(std::string_view symbol) const;
  std::size_t deletion_id() const { return deletion_id_; }

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  std::size_t feature_count() const { return feature_names_.size(); }
  std::optional<std::size_t> feature_index(std::string_view name) const;
  bool has_feature(std::size_t phone_id, std::string_view feature) const;
  bool is_syllabic(std::size_t phone_id) const;

  /// Candidate phone ids for a lowercase letter; throws InvalidInput otherwise.
  const std::vector<std::size_t>& letter_candidates(char letter) const;
  const std::vector<CompositePhone>& composites() const { return composites_; }

  /// Returns a copy with one extra candidate phone for `letter`.
  FeatureSystem with_letter_candidate(char letter, std::string_view symbol) const;

 private:
  std::vector<Phone> phones_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> feature_names_;
  std::array<std::vector<std::size_t>, 26> letters_;
  std::vector<CompositePhone> composites_;
  std::size_t deletion_id_ = 0;
  std::size_t syllabic_feature_ = 0;
};

/// Union of the features of every candidate phone of `letter`.
FeatureSet letter_features(char letter, const FeatureSystem& fs);

/// One-hot phone identity followed by its binary features.
std::size_t phone_encoding_size(const FeatureSystem& fs);
std::vector<double> phone_encoding(std::string_view symbol, const FeatureSystem& fs);

// ---------------------------------------------------------------------------
// Hierarchical linguistic representation.
//
// An utterance is a flat list of words; the sentence > clause > phrase > word
// hierarchy is carried by the boundary marks at the end of each word. A well
// formed rep nests them strictly: a sentence boundary is also a clause,
// phrase and word boundary, and so on down.

enum BoundaryFlag : std::uint8_t {
  kWordBoundary = 1,
  kPhraseBoundary = 2,
  kClauseBoundary = 4,
  kSentenceBoundary = 8,
};

enum class BoundaryLevel : std::size_t { Word = 0, Phrase = 1, Clause = 2, Sentence = 3 };
inline constexpr std::size_t kBoundaryLevels = 4;

/// Marks for a boundary at `level` including every finer level.
std::uint8_t boundary_marks(BoundaryLevel level);

inline constexpr std::size_t kNoNucleus = static_cast<std::size_t>(-1);

struct Syllable {
  std::vector<std::string> phones;
  std::size_t nucleus = kNoNucleus;
  int stress = 0;  // 0 unstressed, 1 primary, 2 secondary
  bool pitch_accent = false;

  bool operator==(const Syllable&) const = default;
};

struct Word {
  std::string orthography;
  std::string pos;
  bool content = false;
  int prominence = 0;
  std::vector<Syllable> syllables;
  std::uint8_t boundary_after = kWordBoundary;
  int break_index = 1;  // ToBI break index 0-4 after this word

  std::size_t phone_count() const;
  std::vector<std::string> phones() const;
};

struct LinguisticRep {
  std::vector<Word> words;

  std::size_t phone_count() const;
};

/// Position of one phone inside a rep.
struct PhoneRef {
  std::size_t word = 0;
  std::size_t syllable = 0;
  std::size_t phone = 0;  // index within the syllable
};

/// Every phone of the rep in utterance order.
std::vector<PhoneRef> flatten(const LinguisticRep& rep);
const std::string& phone_at(const LinguisticRep& rep, const PhoneRef& ref);

struct Violation {
  std::string path;
  std::string message;
};

/// Structural checks: nuclei, stress range, break indices and boundary nesting.
std::vector<Violation> validate(const LinguisticRep& rep);
/// Structural checks plus every phone symbol known to `fs`.
std::vector<Violation> validate(const LinguisticRep& rep, const FeatureSystem& fs);

/// Per phone: distance in phones to the previous and next boundary at each
/// level, 0 when the phone abuts it. Indexed by BoundaryLevel.
struct BoundaryDistance {
  std::array<int, kBoundaryLevels> previous{};
  std::array<int, kBoundaryLevels> next{};

  bool operator==(const BoundaryDistance&) const = default;
};
using BoundaryDistances = std::vector<BoundaryDistance>;

BoundaryDistances boundary_distances(const LinguisticRep& rep);

// ---------------------------------------------------------------------------
// Pronunciation strings: syllables separated by '.', phones by '-', the
// nucleus carries a stress digit ("r-eh1.k-er0-d").

std::vector<Syllable> parse_pronunciation(std::string_view text, const FeatureSystem* fs = nullptr);
std::string format_pronunciation(const std::vector<Syllable>& syllables);

/// Builds syllables from a flat phone string: syllabic phones become nuclei,
/// intervocalic consonants go to the following onset (up to two when the
/// cluster allows it). The first syllable gets primary stress.
std::vector<Syllable> syllabify(const std::vector<std::string>& phones, const FeatureSystem& fs);

}  // namespace nts
