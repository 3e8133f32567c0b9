#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "nts/corpus.hpp"
#include "nts/error.hpp"
#include "nts/phonology.hpp"
#include "support.hpp"

using namespace nts;
using nts::test::features;

namespace {

std::set<std::string> feature_names(const FeatureSet& set, const FeatureSystem& fs) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < fs.feature_count(); ++i)
    if (set[i]) out.insert(fs.feature_names()[i]);
  return out;
}

// Distance to the boundary by walking phone by phone.
int scan(const LinguisticRep& rep, const std::vector<PhoneRef>& flat, std::size_t i, std::size_t level, int step) {
  int d = 0;
  std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i);
  while (true) {
    const std::ptrdiff_t nj = j + step;
    if (nj < 0 || nj >= static_cast<std::ptrdiff_t>(flat.size())) return d;
    const auto wj = flat[j].word, wn = flat[nj].word;
    if (wj != wn && (rep.words[std::min(wj, wn)].boundary_after & (1u << level))) return d;
    ++d;
    j = nj;
  }
}

}  // namespace

TEST(Phonology, InventoryLoads) {
  const auto& fs = features();
  EXPECT_EQ(fs.size(), 45u);
  EXPECT_EQ(fs.feature_count(), 26u);
  EXPECT_EQ(fs.phone(fs.deletion_id()).symbol, kDeletionSymbol);
  for (const char* p : {"dx", "q"}) {
    EXPECT_TRUE(fs.phone(fs.id(p)).postlexical);
    EXPECT_FALSE(fs.phone(fs.id(p)).lexical);
  }
  EXPECT_TRUE(fs.phone(fs.id("t")).lexical);
  EXPECT_TRUE(fs.phone(fs.id("t")).postlexical);
  for (const auto& p : fs.phones())
    EXPECT_TRUE(p.symbol == kDeletionSymbol || p.features.any()) << p.symbol;
  EXPECT_THROW(fs.id("zz"), InvalidInput);
}

TEST(Phonology, LetterFeaturesAreUnions) {
  const auto& fs = features();
  const auto& o = nts::test::oracles()["jaccard"];
  const auto c = feature_names(letter_features('c', fs), fs);
  const auto x = feature_names(letter_features('x', fs), fs);
  EXPECT_EQ(c, (o["c_union"].get<std::set<std::string>>()));
  EXPECT_EQ(x, (o["x_union"].get<std::set<std::string>>()));
  EXPECT_EQ(letter_features('b', fs), fs.phone(fs.id("b")).features);
  EXPECT_THROW(letter_features('A', fs), InvalidInput);
  EXPECT_THROW(letter_features('3', fs), InvalidInput);
}

TEST(Phonology, AddingCandidateNeverRemovesFeatures) {
  const auto& fs = features();
  for (char letter = 'a'; letter <= 'z'; ++letter) {
    const auto before = letter_features(letter, fs);
    for (const char* extra : {"zh", "m", "uw"}) {
      const auto after = letter_features(letter, fs.with_letter_candidate(letter, extra));
      EXPECT_EQ(after & before, before) << letter;
      EXPECT_EQ(after, before | fs.phone(fs.id(extra)).features) << letter;
    }
  }
}

TEST(Phonology, PhoneEncodingLayout) {
  const auto& fs = features();
  const auto v = phone_encoding("t", fs);
  ASSERT_EQ(v.size(), phone_encoding_size(fs));
  ASSERT_EQ(v.size(), 71u);
  EXPECT_EQ(std::count(v.begin(), v.begin() + 45, 1.0), 1);
  EXPECT_EQ(v[fs.id("t")], 1.0);
  EXPECT_EQ(v[45 + *fs.feature_index("stop")], 1.0);
  EXPECT_EQ(v[45 + *fs.feature_index("voiced")], 0.0);
}

TEST(Phonology, PronunciationRoundTrip) {
  const auto& fs = features();
  const auto syl = parse_pronunciation("r-eh1.k-er0-d", &fs);
  ASSERT_EQ(syl.size(), 2u);
  EXPECT_EQ(syl[0].stress, 1);
  EXPECT_EQ(syl[0].nucleus, 1u);
  EXPECT_EQ(syl[1].phones, (std::vector<std::string>{"k", "er", "d"}));
  EXPECT_EQ(format_pronunciation(syl), "r-eh1.k-er0-d");
  EXPECT_THROW(parse_pronunciation("r-eh.k", &fs), Error);
  EXPECT_THROW(parse_pronunciation("zz1", &fs), Error);
}

TEST(Phonology, SyllabifyPutsConsonantsInOnsets) {
  const auto& fs = features();
  const auto syl = syllabify({"b", "ae", "n", "ae", "n", "ax"}, fs);
  ASSERT_EQ(syl.size(), 3u);
  EXPECT_EQ(syl[1].phones, (std::vector<std::string>{"n", "ae"}));
  EXPECT_EQ(syl[0].stress, 1);
  for (const auto& s : syl) EXPECT_NE(s.nucleus, kNoNucleus);
}

TEST(Phonology, ValidateReportsPaths) {
  const auto& fs = features();
  auto rep = nts::test::rep_from_words({"the", "cat", "."}, {"DT", "NN", "."});
  EXPECT_TRUE(validate(rep, fs).empty());

  auto bad = rep;
  bad.words[1].syllables[0].nucleus = kNoNucleus;
  auto v = validate(bad);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].path, "words[1].syllables[0]");

  bad = rep;
  bad.words[1].boundary_after = kWordBoundary | kPhraseBoundary | kSentenceBoundary;  // no clause
  EXPECT_FALSE(validate(bad).empty());

  bad = rep;
  bad.words[1].boundary_after = boundary_marks(BoundaryLevel::Clause);
  v = validate(bad);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].path, "words[1]");

  bad = rep;
  bad.words[0].syllables[0].phones[0] = "zz";
  v = validate(bad, fs);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].path, "words[0].syllables[0].phones[0]");

  bad = rep;
  bad.words[0].syllables[0].stress = 3;
  EXPECT_FALSE(validate(bad).empty());
}

TEST(Phonology, BoundaryMarksNest) {
  EXPECT_EQ(boundary_marks(BoundaryLevel::Word), 1);
  EXPECT_EQ(boundary_marks(BoundaryLevel::Phrase), 3);
  EXPECT_EQ(boundary_marks(BoundaryLevel::Clause), 7);
  EXPECT_EQ(boundary_marks(BoundaryLevel::Sentence), 15);
}

TEST(Phonology, BoundaryDistancesMatchScan) {
  const auto& fs = features();
  Rng rng(5);
  const auto reps = sample_reps(nts::test::tagged_corpus(), nts::test::lexicon(), 60, rng);
  ASSERT_EQ(reps.size(), 60u);
  for (auto rep : reps) {
    // Random inner phrase/clause boundaries exercise every level.
    for (std::size_t w = 0; w + 1 < rep.words.size(); ++w)
      rep.words[w].boundary_after = boundary_marks(static_cast<BoundaryLevel>(rng.below(3)));
    ASSERT_TRUE(validate(rep, fs).empty());
    const auto flat = flatten(rep);
    const auto d = boundary_distances(rep);
    ASSERT_EQ(d.size(), flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i)
      for (std::size_t l = 0; l < kBoundaryLevels; ++l) {
        EXPECT_EQ(d[i].previous[l], scan(rep, flat, i, l, -1));
        EXPECT_EQ(d[i].next[l], scan(rep, flat, i, l, +1));
      }
    // Coarser boundaries are never closer than finer ones.
    for (const auto& b : d)
      for (std::size_t l = 1; l < kBoundaryLevels; ++l) {
        EXPECT_GE(b.previous[l], b.previous[l - 1]);
        EXPECT_GE(b.next[l], b.next[l - 1]);
      }
    EXPECT_EQ(d.front().previous[3], 0);
    EXPECT_EQ(d.back().next[3], 0);
  }
}
