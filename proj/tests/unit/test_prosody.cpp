#include <gtest/gtest.h>

#include <cmath>

#include "nts/corpus.hpp"
#include "nts/error.hpp"
#include "nts/prosody.hpp"
#include "support.hpp"

using namespace nts;
using nts::test::features;

namespace {

LinguisticRep oracle_rep(const nlohmann::json& words) {
  LinguisticRep rep;
  for (const auto& w : words) {
    Word word;
    const auto phones = w["phones"].get<std::vector<std::string>>();
    for (const auto& s : w["syllables"]) {
      Syllable syl;
      const std::size_t start = s[0], end = s[1], nuc = s[2];
      syl.phones.assign(phones.begin() + start, phones.begin() + end);
      syl.nucleus = nuc - start;
      syl.stress = s[3];
      syl.pitch_accent = s[4];
      word.syllables.push_back(syl);
    }
    word.content = w["content"];
    word.boundary_after = w["boundary"].get<std::uint8_t>();
    word.break_index = word.boundary_after == 1 ? 1 : 4;
    rep.words.push_back(word);
  }
  return rep;
}

}  // namespace

TEST(DurationStats, MeanAndUnbiasedStd) {
  const auto& o = nts::test::oracles()["phone_stats"];
  std::vector<std::pair<std::string, double>> tokens;
  for (double d : o["durations"]) tokens.emplace_back("aa", d);
  tokens.emplace_back("t", 50.0);  // single token: std undefined
  const auto s = phone_stats(tokens);
  EXPECT_DOUBLE_EQ(s.get("aa").mean, o["mean"].get<double>());
  EXPECT_NEAR(s.get("aa").std, o["std"].get<double>(), 1e-12);
  EXPECT_EQ(s.get("aa").count, 2u);
  EXPECT_DOUBLE_EQ(s.get("t").std, s.global().std);
  EXPECT_NEAR(s.global().mean, 250.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.get("zh").mean, s.global().mean);
  EXPECT_THROW(phone_stats({}), InvalidInput);

  const auto back = DurationStats::parse(s.serialize());
  EXPECT_EQ(back.serialize(), s.serialize());
  EXPECT_THROW(DurationStats::parse("nts-durstats 1\n"), ParseError);
}

TEST(DurationTransforms, RoundTrips) {
  std::vector<std::pair<std::string, double>> tokens{{"aa", 80.0}, {"aa", 120.0}, {"t", 40.0}, {"t", 60.0}};
  const auto s = phone_stats(tokens);
  for (double ms : {20.0, 35.5, 100.0, 240.0}) {
    EXPECT_NEAR(from_log(to_log(ms)), ms, 1e-9);
    EXPECT_NEAR(from_zscore(to_zscore(ms, "aa", s), "aa", s), ms, 1e-9);
    for (auto mode : {DurationMode::Log, DurationMode::ZScore})
      EXPECT_NEAR(duration_from_output(duration_target(ms, "t", s, mode), "t", s, mode), ms, 1e-9);
  }
  EXPECT_DOUBLE_EQ(to_zscore(100.0, "aa", s), 0.0);
  EXPECT_DOUBLE_EQ(from_zscore(-50.0, "aa", s), kMinDurationMs);
  EXPECT_DOUBLE_EQ(duration_from_output(-5.0, "aa", s, DurationMode::Log), kMinDurationMs);
  EXPECT_THROW(to_log(0.0), InvalidInput);
  EXPECT_EQ(parse_duration_mode("zscore"), DurationMode::ZScore);
  EXPECT_EQ(to_string(DurationMode::Log), "log");
  EXPECT_THROW(parse_duration_mode("linear"), InvalidInput);
}

TEST(DurationEncoding, MatchesOracle) {
  const auto& fs = features();
  const auto& o = nts::test::oracles()["duration_encoding"];
  const auto rep = oracle_rep(o["words"]);
  ASSERT_TRUE(validate(rep, fs).empty());
  const auto all = encode_duration_inputs(rep, fs);
  ASSERT_EQ(all.size(), o["vectors"].size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto expected = o["vectors"][i].get<std::vector<double>>();
    ASSERT_EQ(all[i].size(), expected.size());
    ASSERT_EQ(all[i].size(), duration_input_size(fs));
    for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(all[i][k], expected[k], 1e-12) << i << ":" << k;
    EXPECT_EQ(encode_duration_input(rep, i, fs), all[i]);
  }
  EXPECT_THROW(encode_duration_input(rep, all.size(), fs), InvalidInput);
}

TEST(DurationEncoding, RuleConditions) {
  const auto rep = nts::test::rep_from_words({"the", "city", ",", "live", "."}, {"DT", "NN", ",", "JJ", "."});
  const auto flat = flatten(rep);
  // "the": unstressed function word, not final.
  auto c = rule_conditions(rep, flat[1]);
  EXPECT_TRUE(c[kFunctionWord]);
  EXPECT_TRUE(c[kUnstressedSyllable]);
  EXPECT_TRUE(c[kSyllableNucleus]);
  EXPECT_FALSE(c[kPhraseFinalSyllable]);
  // Last phone of "city" ends a phrase; the word has two syllables.
  c = rule_conditions(rep, flat[5]);
  EXPECT_TRUE(c[kPhraseFinalSyllable]);
  EXPECT_FALSE(c[kClauseFinalSyllable]);
  EXPECT_TRUE(c[kPolysyllabicWord]);
  // "live" closes the sentence and carries the accent.
  c = rule_conditions(rep, flat[7]);
  EXPECT_TRUE(c[kClauseFinalSyllable]);
  EXPECT_TRUE(c[kPrePausal]);
  EXPECT_TRUE(c[kAccentedSyllable]);
  EXPECT_FALSE(c[kFunctionWord]);
}

TEST(DurationNet, ConstantOutputs) {
  const auto& fs = features();
  const auto rep = nts::test::rep_from_words({"we", "live", "here", "."}, {"PRP", "VB", "RB", "."});
  std::vector<std::pair<std::string, double>> tokens{{"w", 60.0}, {"iy", 110.0}, {"iy", 130.0}, {"l", 10.0}};
  const auto stats = phone_stats(tokens);
  TrainConfig cfg;
  auto net = make_duration_network(fs, 4, cfg);
  for (auto& l : net.layers()) std::fill(l.weights.begin(), l.weights.end(), 0.0);
  net.layers().back().bias[0] = std::log(100.0);
  for (double d : predict_durations(rep, net, stats, DurationMode::Log, fs)) EXPECT_NEAR(d, 100.0, 1e-9);

  net.layers().back().bias[0] = 0.0;
  const auto z = predict_durations(rep, net, stats, DurationMode::ZScore, fs);
  const auto flat = flatten(rep);
  for (std::size_t i = 0; i < z.size(); ++i)
    EXPECT_NEAR(z[i], std::max(kMinDurationMs, stats.get(phone_at(rep, flat[i])).mean), 1e-9);
  EXPECT_THROW(predict_durations(rep, Network({3, 1}, Activation::Tanh, Activation::Linear), stats,
                                 DurationMode::Log, fs),
               ModelError);
}

TEST(DurationNet, LearnsSyntheticCorpusQuickly) {
  const auto& fs = features();
  const auto corpus =
      gen_duration_corpus(nts::test::tagged_corpus(), nts::test::lexicon(), fs, 4, 80);
  std::vector<DurationExample> ex;
  for (const auto& u : corpus) ex.push_back({u.rep(), u.durations()});
  const auto stats = phone_stats(duration_tokens(ex));
  const auto data = build_duration_dataset(ex, fs, stats, DurationMode::Log);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.learning_rate = 0.02;
  cfg.seed = 6;
  const auto res = train(make_duration_network(fs, 16, cfg), data, cfg);
  EXPECT_LT(duration_mae(ex, res.net, stats, DurationMode::Log, fs), phone_mean_mae(ex, stats));
}
