#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nts/nn.hpp"
#include "nts/phonology.hpp"

namespace nts {

inline constexpr double kMinDurationMs = 20.0;
inline constexpr std::size_t kDurationWindowRadius = 2;

struct PhoneStat {
  double mean = 0.0;
  double std = 1.0;
  std::size_t count = 0;
};

/// Per-phone duration mean and unbiased standard deviation, with a global
/// fallback for unseen phones and phones whose std is undefined or zero.
class DurationStats {
 public:
  const PhoneStat& global() const { return global_; }
  /// Stats used for `phone` (the global ones when it is unknown).
  PhoneStat get(std::string_view phone) const;
  const std::map<std::string, PhoneStat, std::less<>>& phones() const { return phones_; }

  std::string serialize() const;
  static DurationStats parse(std::string_view text, const std::string& source = "<memory>");
  void save(const std::filesystem::path& path) const;
  static DurationStats load(const std::filesystem::path& path);

  friend DurationStats phone_stats(std::span<const std::pair<std::string, double>> tokens);

 private:
  std::map<std::string, PhoneStat, std::less<>> phones_;
  PhoneStat global_;
};

/// Empty input is an error.
DurationStats phone_stats(std::span<const std::pair<std::string, double>> tokens);

double to_log(double ms);
double from_log(double value);
double to_zscore(double ms, std::string_view phone, const DurationStats& stats);
/// Floors at kMinDurationMs.
double from_zscore(double z, std::string_view phone, const DurationStats& stats);

enum class DurationMode { Log, ZScore };
DurationMode parse_duration_mode(std::string_view s);
std::string_view to_string(DurationMode m);

/// Rule-condition bits, in order.
enum RuleBit : std::size_t {
  kPhraseFinalSyllable = 0,
  kClauseFinalSyllable,
  kUnstressedSyllable,
  kFunctionWord,
  kSyllableNucleus,
  kPrePausal,
  kPolysyllabicWord,
  kAccentedSyllable,
  kRuleBitCount
};
using RuleConditions = std::array<bool, kRuleBitCount>;

RuleConditions rule_conditions(const LinguisticRep& rep, const PhoneRef& ref);

/// Slot per context phone: phone encoding, stress, content flag, four
/// "starts a word/phrase/clause/sentence" flags and four "ends a ..." flags.
std::size_t duration_slot_size(const FeatureSystem& fs);
/// Five slots (radius 2, zero padded), nucleus offset clip(d, 4) / 4,
/// syllables since/until the phrase and clause boundaries and to the
/// previous/next pitch accent (each min(n, 10) / 10), then the rule bits.
std::size_t duration_input_size(const FeatureSystem& fs);
std::vector<double> encode_duration_input(const LinguisticRep& rep, std::size_t phone_index, const FeatureSystem& fs);
/// All phones at once.
std::vector<std::vector<double>> encode_duration_inputs(const LinguisticRep& rep, const FeatureSystem& fs);

/// Training target for a duration under `mode`.
double duration_target(double ms, std::string_view phone, const DurationStats& stats, DurationMode mode);
/// Inverse of duration_target, floored at kMinDurationMs.
double duration_from_output(double y, std::string_view phone, const DurationStats& stats, DurationMode mode);

struct DurationExample {
  LinguisticRep rep;
  std::vector<double> durations;  // ms per phone
};

std::vector<std::pair<std::string, double>> duration_tokens(std::span<const DurationExample> examples);
std::vector<Sample> build_duration_dataset(std::span<const DurationExample> examples, const FeatureSystem& fs,
                                           const DurationStats& stats, DurationMode mode);

Network make_duration_network(const FeatureSystem& fs, std::size_t hidden, const TrainConfig& cfg);

std::vector<double> predict_durations(const LinguisticRep& rep, const Network& net, const DurationStats& stats,
                                      DurationMode mode, const FeatureSystem& fs);

/// Mean absolute error (ms) of predictions against the examples.
double duration_mae(std::span<const DurationExample> examples, const Network& net, const DurationStats& stats,
                    DurationMode mode, const FeatureSystem& fs);
/// Mean absolute error of predicting each phone's mean duration.
double phone_mean_mae(std::span<const DurationExample> examples, const DurationStats& stats);

}  // namespace nts
