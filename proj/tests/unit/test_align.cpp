#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <memory>

#include "nts/align.hpp"
#include "nts/error.hpp"
#include "nts/random.hpp"
#include "support.hpp"

using namespace nts;

namespace {

CostModel oracle_model() {
  const auto& o = nts::test::oracles()["align"];
  auto table = std::make_shared<std::map<std::pair<std::string, std::string>, double>>();
  for (const auto& row : o["table"]) (*table)[{row[0].get<std::string>(), row[1].get<std::string>()}] = row[2];
  return {[table](std::string_view a, std::string_view b) { return table->at({std::string(a), std::string(b)}); },
          o["insertion"].get<double>(), o["deletion"].get<double>()};
}

Symbols random_symbols(Rng& rng, std::size_t max_len) {
  static const Symbols alphabet{"a", "b", "c", "d"};
  Symbols s(rng.below(max_len + 1));
  for (auto& x : s) x = alphabet[rng.below(alphabet.size())];
  return s;
}

double summed_cost(const Alignment& al, const CostModel& cm) {
  double c = 0.0;
  for (const auto& p : al.pairs) c += pair_cost(p, cm);
  return c;
}

}  // namespace

TEST(Align, OracleCosts) {
  const auto cm = oracle_model();
  for (const auto& c : nts::test::oracles()["align"]["cases"]) {
    const auto a = c["a"].get<Symbols>(), b = c["b"].get<Symbols>();
    const auto al = align(a, b, cm);
    EXPECT_NEAR(al.total_cost, c["cost"].get<double>(), 1e-12);
    EXPECT_TRUE(reconstructs(al, a, b));
    EXPECT_NEAR(summed_cost(al, cm), al.total_cost, 1e-12);
  }
}

TEST(Align, EmptyInputs) {
  const auto cm = oracle_model();
  EXPECT_EQ(align({}, {}, cm).pairs.size(), 0u);
  const auto al = align({"a", "b"}, {}, cm);
  EXPECT_NEAR(al.total_cost, 1.2, 1e-12);
  ASSERT_EQ(al.pairs.size(), 2u);
  EXPECT_FALSE(al.pairs[0].b);
}

TEST(Align, TieBreakPrefersSubstitution) {
  const CostModel cm{[](std::string_view, std::string_view) { return 2.0; }, 1.0, 1.0};
  const auto al = align({"a"}, {"b"}, cm);
  ASSERT_EQ(al.pairs.size(), 1u);
  EXPECT_EQ(al.pairs[0], (AlignedPair{"a", "b"}));
}

TEST(Align, MatchesBruteForceOnRandomModels) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::map<std::pair<std::string, std::string>, double> table;
    for (const char* x : {"a", "b", "c", "d"})
      for (const char* y : {"a", "b", "c", "d"})
        table[{x, y}] = std::string(x) == y ? 0.0 : std::round(rng.uniform(0.0, 3.0) * 4.0) / 4.0;
    const CostModel cm{[&](std::string_view x, std::string_view y) { return table.at({std::string(x), std::string(y)}); },
                       std::round(rng.uniform(0.25, 2.0) * 4.0) / 4.0, std::round(rng.uniform(0.25, 2.0) * 4.0) / 4.0};
    const auto a = random_symbols(rng, 6), b = random_symbols(rng, 6);
    const auto dp = align(a, b, cm);
    const auto bf = brute_force_align(a, b, cm);
    EXPECT_EQ(dp.total_cost, bf.total_cost);
    EXPECT_TRUE(reconstructs(dp, a, b));
    EXPECT_TRUE(reconstructs(bf, a, b));
    EXPECT_NEAR(summed_cost(dp, cm), dp.total_cost, 1e-12);
  }
}

TEST(Align, SymmetricCostsGiveSymmetricTotals) {
  Rng rng(12);
  const CostModel cm{[](std::string_view x, std::string_view y) { return x == y ? 0.0 : 1.5; }, 0.75, 0.75};
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_symbols(rng, 8), b = random_symbols(rng, 8);
    EXPECT_DOUBLE_EQ(align(a, b, cm).total_cost, align(b, a, cm).total_cost);
    EXPECT_DOUBLE_EQ(align(a, a, cm).total_cost, 0.0);
  }
}

TEST(Align, BruteForceRejectsLongInputs) {
  const auto cm = oracle_model();
  EXPECT_THROW(brute_force_align(Symbols(7, "a"), {"a"}, cm), InvalidInput);
}

TEST(Align, ReconstructsDetectsCorruption) {
  const auto cm = oracle_model();
  auto al = align({"a", "b"}, {"b"}, cm);
  EXPECT_TRUE(reconstructs(al, {"a", "b"}, {"b"}));
  EXPECT_FALSE(reconstructs(al, {"a", "c"}, {"b"}));
  al.pairs.push_back({std::nullopt, std::nullopt});
  EXPECT_FALSE(reconstructs(al, {"a", "b"}, {"b"}));
}

TEST(Align, JaccardValues) {
  const auto& fs = nts::test::features();
  const auto& o = nts::test::oracles()["jaccard"];
  const auto lp = letter_phone_cost(fs);
  const auto pp = phone_phone_cost(fs);
  EXPECT_NEAR(lp.substitution("c", "k"), o["c_k"].get<double>(), 1e-12);
  EXPECT_NEAR(lp.substitution("c", "m"), o["c_m"].get<double>(), 1e-12);
  EXPECT_NEAR(pp.substitution("t", "dx"), o["t_dx"].get<double>(), 1e-12);
  EXPECT_NEAR(pp.substitution("t", "m"), o["t_m"].get<double>(), 1e-12);
  EXPECT_EQ(pp.substitution("t", "t"), 0.0);
  EXPECT_EQ(lp.insertion, kFeatureIndelCost);
  EXPECT_EQ(pp.deletion, kFeatureIndelCost);
  EXPECT_EQ(jaccard_distance({}, {}), 1.0);
  // Distances stay in [0, 1] and are symmetric.
  for (const auto& x : fs.phones())
    for (const auto& y : fs.phones()) {
      const double d = jaccard_distance(x.features, y.features);
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, 1.0);
      EXPECT_EQ(d, jaccard_distance(y.features, x.features));
    }
}

TEST(Align, LetterToPhoneAlignment) {
  const auto& fs = nts::test::features();
  const auto al = align({"c", "a", "b"}, {"k", "ae", "b"}, letter_phone_cost(fs));
  ASSERT_EQ(al.pairs.size(), 3u);
  EXPECT_EQ(al.pairs[0], (AlignedPair{"c", "k"}));
  EXPECT_EQ(al.pairs[2], (AlignedPair{"b", "b"}));
}
