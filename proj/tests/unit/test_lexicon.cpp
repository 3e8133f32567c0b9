#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nts/error.hpp"
#include "nts/lexicon.hpp"
#include "support.hpp"

using namespace nts;
using nts::test::features;
using nts::test::lexicon;

TEST(Tokenize, SentencesAndPunctuation) {
  const auto s = tokenize("Hello, World!  It's 42 degrees... ok");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], (Sentence{"hello", ",", "world", "!"}));
  EXPECT_EQ(s[1], (Sentence{"it's", "forty", "two", "degrees", "."}));
  EXPECT_EQ(s[2], (Sentence{"ok"}));
  EXPECT_TRUE(tokenize("  ... ,,, ").empty());
}

TEST(Tokenize, RenderRoundTrip) {
  for (const char* text : {"A b; c: d. E!", "we live here, they live there.", "1999 cats?"}) {
    const auto t = tokenize(text);
    EXPECT_EQ(tokenize(render(t)), t) << text;
  }
}

TEST(Tokenize, NumberWords) {
  EXPECT_EQ(number_words(0), (std::vector<std::string>{"zero"}));
  EXPECT_EQ(number_words(123), (std::vector<std::string>{"one", "hundred", "twenty", "three"}));
  EXPECT_EQ(number_words(2005), (std::vector<std::string>{"two", "thousand", "five"}));
}

TEST(Lexicon, HomographVariants) {
  const auto& lex = lexicon();
  ASSERT_NE(lex.find("live"), nullptr);
  EXPECT_EQ(format_pronunciation(*lookup("live", "VB", lex)), "l-ih1-v");
  EXPECT_EQ(format_pronunciation(*lookup("live", "JJ", lex)), "l-ay1-v");
  // Unlisted tag falls back to the first variant.
  EXPECT_EQ(format_pronunciation(*lookup("live", "NN", lex)), "l-ih1-v");
  EXPECT_FALSE(lookup("qwertyuiop", "NN", lex));
  EXPECT_EQ(lex.tags_for("about"), (std::vector<std::string>{"RB", "IN"}));
}

TEST(Lexicon, ParseErrors) {
  const auto& fs = features();
  try {
    Lexicon::parse("cat\tNN\tk-ae1-t\ncat\tNN\tk-ah1-t\n", fs, "lex");
    FAIL() << "duplicate accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(Lexicon::parse("cat\tNN\n", fs), ParseError);
  EXPECT_THROW(Lexicon::parse("cat\tNN\tk-dx1-t\n", fs), ParseError);  // postlexical-only phone
  EXPECT_THROW(Lexicon::parse("cat\tNN\tk-zz1-t\n", fs), ParseError);
  const auto lex = Lexicon::parse("# c\nread\tVB\tr-iy1-d\nread\tVBD,VBN\tr-eh1-d\nread\tNN\tr-iy1-d\n", fs);
  ASSERT_EQ(lex.find("read")->variants.size(), 2u);
  EXPECT_EQ(lex.find("read")->variants[0].tags, (std::vector<std::string>{"VB", "NN"}));
}

TEST(Lexicon, AnnotateContentWords) {
  Word w;
  w.pos = "NN";
  w.syllables = parse_pronunciation("k-ae1-t");
  annotate_word(w);
  EXPECT_TRUE(w.content);
  EXPECT_TRUE(w.syllables[0].pitch_accent);
  w.pos = "DT";
  w.syllables = parse_pronunciation("dh-ax0");
  annotate_word(w);
  EXPECT_FALSE(w.content);
  EXPECT_FALSE(w.syllables[0].pitch_accent);
}

TEST(Tagger, HandCounts) {
  const auto corpus = parse_tagged_corpus("a/DT dog/NN runs/VB\na/DT run/NN\nrun/VB\n");
  const auto m = train_tagger(corpus, 0.5);
  const auto dt = *m.tag_index("DT"), nn = *m.tag_index("NN"), vb = *m.tag_index("VB");
  EXPECT_EQ(m.transition_count(std::nullopt, dt), 2.0);
  EXPECT_EQ(m.transition_count(std::nullopt, vb), 1.0);
  EXPECT_EQ(m.transition_count(dt, nn), 2.0);
  EXPECT_EQ(m.transition_count(nn, vb), 1.0);
  EXPECT_EQ(m.emission_count("run", nn), 1.0);
  EXPECT_EQ(m.emission_count("run", vb), 1.0);
  // P(NN | DT) = (2 + 0.5) / (2 + 0.5 * 3).
  EXPECT_NEAR(m.transition_logprob(dt, nn), std::log(2.5 / 3.5), 1e-12);
  for (std::optional<std::size_t> from : {std::optional<std::size_t>{}, std::optional<std::size_t>{dt}}) {
    double sum = 0.0;
    for (std::size_t t = 0; t < m.tags().size(); ++t) sum += std::exp(m.transition_logprob(from, t));
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_EQ(m.emission_logprob("dog", vb, nullptr), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(train_tagger({}, 0.1), InvalidInput);
  EXPECT_THROW(parse_tagged_corpus("a/DT dog\n"), ParseError);
}

TEST(Tagger, SerializeRoundTrip) {
  const auto m = train_tagger(nts::test::tagged_corpus());
  const auto back = TagModel::parse(m.serialize());
  EXPECT_EQ(back.tags(), m.tags());
  EXPECT_EQ(back.serialize(), m.serialize());
  EXPECT_THROW(TagModel::parse("garbage\n"), ParseError);
}

TEST(Tagger, ViterbiMatchesExhaustiveSearch) {
  const auto m = train_tagger(nts::test::tagged_corpus());
  const auto& lex = lexicon();
  const std::vector<Sentence> sentences = {
      {"they", "live", "here", "."}, {"a", "live", "wire", "."}, {"we", "read", "the", "book", "."},
      {"the", "zorblat", "runs", "."}, {"live", "!"}};
  const auto T = m.tags().size();
  for (const auto& s : sentences) {
    const auto got = pos_tag(s, m, &lex);
    ASSERT_EQ(got.size(), s.size());
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_seq;
    std::vector<std::size_t> seq(s.size(), 0);
    // Enumerate only the allowed tags per position to keep the search small.
    std::vector<std::vector<std::size_t>> cand(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t t = 0; t < T; ++t)
        if (std::isfinite(m.emission_logprob(s[i], t, &lex))) cand[i].push_back(t);
    std::vector<std::size_t> idx(s.size(), 0);
    while (true) {
      double score = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        seq[i] = cand[i][idx[i]];
        score += m.transition_logprob(i ? std::optional<std::size_t>{seq[i - 1]} : std::nullopt, seq[i]) +
                 m.emission_logprob(s[i], seq[i], &lex);
      }
      if (score > best + 1e-12) {
        best = score;
        best_seq = seq;
      }
      std::size_t k = 0;
      while (k < s.size() && ++idx[k] == cand[k].size()) idx[k++] = 0;
      if (k == s.size()) break;
    }
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(got[i], m.tags()[best_seq[i]]) << s[i];
  }
}

TEST(Tagger, ResolvesHomograph) {
  const auto m = train_tagger(nts::test::tagged_corpus());
  const auto a = pos_tag({"they", "live", "here", "."}, m, &lexicon());
  const auto b = pos_tag({"a", "live", "wire", "."}, m, &lexicon());
  EXPECT_EQ(a[1], "VB");
  EXPECT_EQ(b[1], "JJ");
}
