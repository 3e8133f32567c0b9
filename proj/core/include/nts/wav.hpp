#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "nts/vocoder.hpp"

namespace nts {

/// RIFF/WAVE, PCM16 mono only. Samples map to [-1, 1) by dividing by 32768.
/// Unsupported layouts raise DataError naming the offending chunk.
AudioBuffer read_wav(const std::filesystem::path& path);
AudioBuffer decode_wav(std::span<const unsigned char> bytes);

/// 44-byte canonical header followed by the data chunk. Samples are scaled
/// by 32768, rounded and clamped to the int16 range.
void write_wav(const AudioBuffer& audio, const std::filesystem::path& path);
std::vector<unsigned char> encode_wav(const AudioBuffer& audio);

}  // namespace nts
