#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nts/acoustic.hpp"
#include "nts/corpus.hpp"
#include "nts/error.hpp"
#include "nts/labels.hpp"
#include "support.hpp"

using namespace nts;
using nts::test::features;

namespace {

LinguisticRep single_vowel() {
  Word w;
  w.orthography = "oh";
  w.pos = "UH";
  w.syllables = {Syllable{{"ow"}, 0, 1, false}};
  w.boundary_after = boundary_marks(BoundaryLevel::Sentence);
  w.break_index = 4;
  return LinguisticRep{{w}};
}

AcousticExample vowel_example(std::uint64_t seed) {
  const auto corpus = gen_vowel_corpus(nts::test::tagged_corpus(), nts::test::lexicon(), features(), seed, 1);
  return {corpus.labels[0].rep(), corpus.labels[0].durations(), corpus.audio[0]};
}

}  // namespace

TEST(AcousticEncoding, MatchesOracle) {
  const auto& fs = features();
  const auto& o = nts::test::oracles()["acoustic_encoding"];
  const auto rep = single_vowel();
  const std::vector<double> durations{o["duration"].get<double>()};
  const FrameEncoder enc(rep, durations, fs);
  EXPECT_EQ(enc.frames(), o["frames"].get<std::size_t>());
  FrameVector prev{};
  for (std::size_t k = 0; k < kFrameVectorSize; ++k) prev[k] = o["previous"][k].get<double>();
  const std::vector<FrameVector> previous{prev};
  const auto v = enc.encode(o["frame"].get<std::size_t>(), previous);
  const auto expected = o["expected"].get<std::vector<double>>();
  ASSERT_EQ(v.size(), expected.size());
  ASSERT_EQ(v.size(), acoustic_input_size(fs));
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(v[k], expected[k], 1e-12) << k;
  EXPECT_EQ(encode_frame_input(rep, durations, 1, previous, fs), v);
}

TEST(AcousticEncoding, FrameCountsAndLocation) {
  const std::vector<double> a{15.0, 14.9}, b{4.0}, c{25.0, 25.0, 50.0};
  EXPECT_EQ(frame_count(a), 3u);
  EXPECT_EQ(frame_count(b), 0u);
  EXPECT_EQ(frame_count(c), 10u);
  const auto rep = nts::test::rep_from_words({"the", "cat", "."}, {"DT", "NN", "."});
  const std::vector<double> d{30.0, 40.0, 50.0, 80.0, 60.0};
  const FrameEncoder enc(rep, d, features());
  ASSERT_EQ(enc.frames(), 26u);
  std::size_t last_phone = 0;
  for (std::size_t f = 0; f < enc.frames(); ++f) {
    const auto [phone, pos] = enc.locate(f);
    EXPECT_GE(phone, last_phone);
    EXPECT_GE(pos, 0.0);
    EXPECT_LT(pos, 1.0);
    last_phone = phone;
  }
  EXPECT_EQ(enc.locate(0).first, 0u);
  EXPECT_EQ(enc.locate(25).first, 4u);
  EXPECT_THROW(enc.locate(26), InvalidInput);
  const std::vector<double> wrong{30.0};
  EXPECT_THROW(FrameEncoder(rep, wrong, features()), InvalidInput);
}

TEST(AcousticFrames, NormalizeRoundTrip) {
  FrameParams f;
  f.f0 = 123.0;
  f.power = -23.5;
  f.boundary_freq = 2500.0;
  f.lsf = flat_lsf();
  const auto v = normalize_frame(f);
  EXPECT_EQ(v[3], 1.0);
  const auto back = denormalize_frame(v);
  EXPECT_NEAR(back.f0, f.f0, 1e-9);
  EXPECT_NEAR(back.power, f.power, 1e-9);
  EXPECT_NEAR(back.boundary_freq, f.boundary_freq, 1e-9);
  for (std::size_t k = 0; k < kLpcOrder; ++k) EXPECT_NEAR(back.lsf[k], f.lsf[k], 1e-9);

  auto unvoiced = v;
  unvoiced[3] = 0.2;
  EXPECT_EQ(denormalize_frame(unvoiced).f0, 0.0);
  std::vector<double> garbage(kFrameVectorSize, std::nan(""));
  EXPECT_FALSE(frame_violation(denormalize_frame(garbage), 8000.0));
}

TEST(AcousticFrames, TargetsAreReanalysis) {
  const auto& fs = features();
  const auto ex = vowel_example(3);
  const std::vector<AcousticExample> examples{ex};
  const auto ds = build_frame_dataset(examples, fs);
  const auto frames = analyze(ex.audio);
  ASSERT_EQ(ds.size(), frame_count(ex.durations));
  ASSERT_LE(ds.size(), frames.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto t = normalize_frame(frames[i]);
    for (std::size_t k = 0; k < kFrameVectorSize; ++k) ASSERT_EQ(ds[i].target[k], t[k]);
    // Feedback is teacher-forced from the previous targets.
    if (i > 0) {
      const std::size_t base = acoustic_base_input_size(fs);
      for (std::size_t k = 0; k < kFrameVectorSize; ++k) ASSERT_EQ(ds[i].input[base + k], ds[i - 1].target[k]);
    }
  }
  auto longer = ex;
  longer.durations.back() += 500.0;
  const std::vector<AcousticExample> bad{longer};
  EXPECT_THROW(build_frame_dataset(bad, fs), DataError);
}

TEST(AcousticFrames, CacheRoundTrip) {
  nts::test::TempDir dir("frames");
  const std::vector<Sample> s{{{1.0, 2.0}, {3.0}}, {{4.0, 5.0}, {6.0}}};
  save_frame_dataset(dir / "c.bin", s);
  const auto back = load_frame_dataset(dir / "c.bin");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].input, s[1].input);
  EXPECT_EQ(back[1].target, s[1].target);
  std::filesystem::resize_file(dir / "c.bin", std::filesystem::file_size(dir / "c.bin") - 4);
  EXPECT_THROW(load_frame_dataset(dir / "c.bin"), DataError);
}

TEST(AcousticNet, OverfitsOneUtterance) {
  const auto& fs = features();
  const std::vector<AcousticExample> examples{vowel_example(5)};
  const auto ds = build_frame_dataset(examples, fs);
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.learning_rate = 0.01;
  cfg.seed = 9;
  const auto res = train(make_acoustic_network(fs, 32, cfg), ds, cfg);

  const auto frames = generate_frames(examples[0].rep, examples[0].durations, res.net, fs);
  EXPECT_EQ(frames.size(), frame_count(examples[0].durations));
  // Free-running output: mean LSFs within 5% of the analysis means.
  const auto analysis = analyze(examples[0].audio);
  ASSERT_GE(analysis.size(), frames.size());
  for (std::size_t k = 0; k < kLpcOrder; ++k) {
    double gen = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      gen += frames[i].lsf[k];
      ref += analysis[i].lsf[k];
    }
    EXPECT_LT(std::abs(gen - ref) / ref, 0.05) << "lsf " << k;
  }
  for (const auto& f : frames) EXPECT_FALSE(frame_violation(f, 8000.0));
  EXPECT_THROW(generate_frames(examples[0].rep, examples[0].durations,
                               Network({3, 14}, Activation::Tanh, Activation::Linear), fs),
               ModelError);
}
