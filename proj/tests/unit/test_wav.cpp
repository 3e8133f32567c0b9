#include <gtest/gtest.h>

#include "nts/error.hpp"
#include "nts/wav.hpp"
#include "support.hpp"

using namespace nts;

TEST(Wav, ReadsFixture) {
  const auto& o = nts::test::oracles()["wav"];
  const auto a = read_wav(nts::test::test_data_dir() / "fixture.wav");
  EXPECT_EQ(a.sample_rate, o["rate"].get<int>());
  const auto s = o["samples"].get<std::vector<int>>();
  ASSERT_EQ(a.samples.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(a.samples[i], s[i] / 32768.0);
  // Encoding the decoded samples reproduces the fixture byte for byte.
  EXPECT_EQ(encode_wav(a), nts::test::read_bytes(nts::test::test_data_dir() / "fixture.wav"));
}

TEST(Wav, RoundTripAndClamping) {
  nts::test::TempDir dir("wav");
  AudioBuffer a;
  a.sample_rate = 22050;
  a.samples = {0.0, 0.25, -0.25, 1.5, -1.5, 0.999};
  write_wav(a, dir / "x.wav");
  const auto b = read_wav(dir / "x.wav");
  EXPECT_EQ(b.sample_rate, 22050);
  EXPECT_EQ(b.samples[1], 0.25);
  EXPECT_EQ(b.samples[3], 32767.0 / 32768.0);
  EXPECT_EQ(b.samples[4], -1.0);
  EXPECT_EQ(encode_wav(a).size(), 44u + 2 * a.samples.size());
  a.samples[0] = std::nan("");
  EXPECT_THROW(encode_wav(a), InvalidInput);
}

TEST(Wav, RejectsUnsupportedLayouts) {
  auto bytes = nts::test::read_bytes(nts::test::test_data_dir() / "fixture.wav");
  auto stereo = bytes;
  stereo[22] = 2;
  try {
    decode_wav(stereo);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("fmt "), std::string::npos);
  }
  auto eight_bit = bytes;
  eight_bit[34] = 8;
  EXPECT_THROW(decode_wav(eight_bit), DataError);
  auto not_riff = bytes;
  not_riff[0] = 'X';
  EXPECT_THROW(decode_wav(not_riff), DataError);
  EXPECT_THROW(decode_wav(std::vector<unsigned char>(bytes.begin(), bytes.begin() + 30)), DataError);
  EXPECT_THROW(read_wav("/nonexistent/file.wav"), DataError);
}
