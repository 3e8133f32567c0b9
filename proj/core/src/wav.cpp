#include "nts/wav.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "nts/error.hpp"
#include "text_util.hpp"

namespace nts {
namespace {

std::string tag_at(detail::ByteReader<DataError>& r) {
  std::string t(4, '\0');
  for (auto& c : t) c = static_cast<char>(r.le<std::uint8_t>());
  return t;
}

}  // namespace

AudioBuffer decode_wav(std::span<const unsigned char> bytes) {
  if (bytes.size() < 12) throw DataError("wav: 'RIFF' header truncated");
  detail::ByteReader<DataError> r(bytes);
  if (tag_at(r) != "RIFF") throw DataError("wav: missing 'RIFF' chunk");
  r.u32();
  if (tag_at(r) != "WAVE") throw DataError("wav: 'RIFF' chunk is not WAVE");
  bool have_fmt = false;
  AudioBuffer audio;
  while (!r.done()) {
    if (r.remaining() < 8) throw DataError("wav: chunk header truncated");
    const auto id = tag_at(r);
    const auto size = r.u32();
    if (r.remaining() < size) throw DataError("wav: '" + id + "' chunk truncated");
    if (id == "fmt ") {
      if (size < 16) throw DataError("wav: 'fmt ' chunk too short");
      const auto format = r.le<std::uint16_t>();
      const auto channels = r.le<std::uint16_t>();
      const auto rate = r.u32();
      r.u32();  // byte rate
      r.le<std::uint16_t>();  // block align
      const auto bits = r.le<std::uint16_t>();
      r.skip(size - 16);
      if (format != 1) throw DataError("wav: 'fmt ' format " + std::to_string(format) + " is not PCM");
      if (channels != 1) throw DataError("wav: 'fmt ' has " + std::to_string(channels) + " channels, need mono");
      if (bits != 16) throw DataError("wav: 'fmt ' has " + std::to_string(bits) + " bits per sample, need 16");
      audio.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw DataError("wav: 'data' chunk before 'fmt '");
      if (size % 2 != 0) throw DataError("wav: 'data' chunk has odd size");
      audio.samples.resize(size / 2);
      for (auto& s : audio.samples) s = static_cast<double>(r.le<std::int16_t>()) / 32768.0;
      return audio;
    } else {
      r.skip(std::min<std::size_t>(r.remaining(), size + (size & 1)));
    }
  }
  throw DataError(have_fmt ? "wav: missing 'data' chunk" : "wav: missing 'fmt ' chunk");
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  return decode_wav(std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

std::vector<unsigned char> encode_wav(const AudioBuffer& audio) {
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  detail::ByteWriter w;
  w.raw("RIFF");
  w.u32(36 + data_bytes);
  w.raw("WAVE");
  w.raw("fmt ");
  w.u32(16);
  w.le<std::uint16_t>(1);
  w.le<std::uint16_t>(1);
  w.u32(static_cast<std::uint32_t>(audio.sample_rate));
  w.u32(static_cast<std::uint32_t>(audio.sample_rate) * 2);
  w.le<std::uint16_t>(2);
  w.le<std::uint16_t>(16);
  w.raw("data");
  w.u32(data_bytes);
  for (double s : audio.samples) {
    if (!std::isfinite(s)) throw InvalidInput("write_wav: non-finite sample");
    const double q = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    w.le<std::int16_t>(static_cast<std::int16_t>(q));
  }
  return std::move(w.bytes());
}

void write_wav(const AudioBuffer& audio, const std::filesystem::path& path) {
  const auto bytes = encode_wav(audio);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace nts
