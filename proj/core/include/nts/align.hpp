#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nts/phonology.hpp"

namespace nts {

using Symbols = std::vector<std::string>;

/// Costs for turning sequence `a` into sequence `b`. Deletion consumes a
/// symbol of `a` against a gap, insertion a symbol of `b` against a gap.
struct CostModel {
  std::function<double(std::string_view a, std::string_view b)> substitution;
  double insertion = 1.0;
  double deletion = 1.0;
};

struct AlignedPair {
  std::optional<std::string> a;  // nullopt = gap
  std::optional<std::string> b;

  bool operator==(const AlignedPair&) const = default;
};

struct Alignment {
  std::vector<AlignedPair> pairs;
  double total_cost = 0.0;
};

/// Global minimum-cost alignment (Needleman-Wunsch style DP). Ties in the
/// backtrace prefer substitution, then deletion, then insertion.
Alignment align(const Symbols& a, const Symbols& b, const CostModel& cm);

/// Exhaustive search over every gapped pairing; both inputs at most 6 long.
Alignment brute_force_align(const Symbols& a, const Symbols& b, const CostModel& cm);

/// Cost of a single pair under `cm` (gap on one side = indel).
double pair_cost(const AlignedPair& p, const CostModel& cm);

/// True when the pairs contain no (gap, gap) and stripping gaps gives back
/// `a` and `b`.
bool reconstructs(const Alignment& al, const Symbols& a, const Symbols& b);

inline constexpr double kFeatureIndelCost = 0.9;

/// 1 - |A and B| / |A or B| over feature sets; 1 when both are empty.
double jaccard_distance(const FeatureSet& x, const FeatureSet& y);

/// Letters (single lowercase characters) against phone symbols.
CostModel letter_phone_cost(const FeatureSystem& fs);
/// Lexical against postlexical phone symbols.
CostModel phone_phone_cost(const FeatureSystem& fs);

}  // namespace nts
