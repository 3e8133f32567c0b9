#include "nts/align.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <memory>

#include "nts/error.hpp"

namespace nts {

double pair_cost(const AlignedPair& p, const CostModel& cm) {
  if (p.a && p.b) return cm.substitution(*p.a, *p.b);
  if (p.a) return cm.deletion;
  if (p.b) return cm.insertion;
  throw InvalidInput("(gap, gap) pair");
}

Alignment align(const Symbols& a, const Symbols& b, const CostModel& cm) {
  const std::size_t n = a.size(), m = b.size();
  const std::size_t w = m + 1;
  std::vector<double> cost((n + 1) * w);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return cost[i * w + j]; };
  // Substitution costs are cached so the backtrace compares identical values.
  std::vector<double> sub(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) sub[i * m + j] = cm.substitution(a[i], b[j]);

  at(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n; ++i) at(i, 0) = at(i - 1, 0) + cm.deletion;
  for (std::size_t j = 1; j <= m; ++j) at(0, j) = at(0, j - 1) + cm.insertion;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double s = at(i - 1, j - 1) + sub[(i - 1) * m + (j - 1)];
      const double d = at(i - 1, j) + cm.deletion;
      const double ins = at(i, j - 1) + cm.insertion;
      at(i, j) = std::min(s, std::min(d, ins));
    }
  }

  Alignment out;
  out.total_cost = at(n, m);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + sub[(i - 1) * m + (j - 1)]) {
      out.pairs.push_back({a[i - 1], b[j - 1]});
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + cm.deletion) {
      out.pairs.push_back({a[i - 1], std::nullopt});
      --i;
    } else {
      out.pairs.push_back({std::nullopt, b[j - 1]});
      --j;
    }
  }
  std::reverse(out.pairs.begin(), out.pairs.end());
  return out;
}

namespace {

struct Search {
  const Symbols& a;
  const Symbols& b;
  const CostModel& cm;
  std::vector<AlignedPair> path;
  Alignment best{{}, std::numeric_limits<double>::infinity()};

  void run(std::size_t i, std::size_t j, double acc) {
    if (i == a.size() && j == b.size()) {
      if (acc < best.total_cost) best = {path, acc};
      return;
    }
    if (i < a.size() && j < b.size()) step({a[i], b[j]}, i + 1, j + 1, acc);
    if (i < a.size()) step({a[i], std::nullopt}, i + 1, j, acc);
    if (j < b.size()) step({std::nullopt, b[j]}, i, j + 1, acc);
  }

  void step(AlignedPair p, std::size_t i, std::size_t j, double acc) {
    const double c = pair_cost(p, cm);
    path.push_back(std::move(p));
    run(i, j, acc + c);
    path.pop_back();
  }
};

}  // namespace

Alignment brute_force_align(const Symbols& a, const Symbols& b, const CostModel& cm) {
  if (a.size() > 6 || b.size() > 6) throw InvalidInput("brute_force_align supports sequences of length <= 6");
  Search s{a, b, cm, {}};
  s.run(0, 0, 0.0);
  return s.best;
}

bool reconstructs(const Alignment& al, const Symbols& a, const Symbols& b) {
  Symbols ra, rb;
  for (const auto& p : al.pairs) {
    if (!p.a && !p.b) return false;
    if (p.a) ra.push_back(*p.a);
    if (p.b) rb.push_back(*p.b);
  }
  return ra == a && rb == b;
}

double jaccard_distance(const FeatureSet& x, const FeatureSet& y) {
  const auto uni = (x | y).count();
  if (uni == 0) return 1.0;
  return 1.0 - static_cast<double>((x & y).count()) / static_cast<double>(uni);
}

CostModel letter_phone_cost(const FeatureSystem& fs) {
  // Letter feature sets are computed once; the model owns a snapshot.
  auto letters = std::make_shared<std::array<FeatureSet, 26>>();
  for (char c = 'a'; c <= 'z'; ++c) (*letters)[static_cast<std::size_t>(c - 'a')] = letter_features(c, fs);
  auto phones = std::make_shared<FeatureSystem>(fs);
  CostModel cm;
  cm.substitution = [letters, phones](std::string_view letter, std::string_view phone) {
    if (letter.size() != 1 || letter[0] < 'a' || letter[0] > 'z')
      throw InvalidInput("letter_phone_cost: not a letter '" + std::string(letter) + "'");
    return jaccard_distance((*letters)[static_cast<std::size_t>(letter[0] - 'a')],
                            phones->phone(phones->id(phone)).features);
  };
  cm.insertion = kFeatureIndelCost;
  cm.deletion = kFeatureIndelCost;
  return cm;
}

CostModel phone_phone_cost(const FeatureSystem& fs) {
  auto phones = std::make_shared<FeatureSystem>(fs);
  CostModel cm;
  cm.substitution = [phones](std::string_view x, std::string_view y) {
    if (x == y) return 0.0;
    return jaccard_distance(phones->phone(phones->id(x)).features, phones->phone(phones->id(y)).features);
  };
  cm.insertion = kFeatureIndelCost;
  cm.deletion = kFeatureIndelCost;
  return cm;
}

}  // namespace nts
