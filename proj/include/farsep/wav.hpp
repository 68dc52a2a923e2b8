#pragma once

#include <filesystem>

#include "farsep/types.hpp"

namespace farsep {

struct WavData {
  MultiSignal channels;
  double sample_rate = 16000.0;
};

// Reads PCM16, PCM24 or IEEE float32 RIFF/WAVE (WAVE_FORMAT_EXTENSIBLE too).
WavData read_wav(const std::filesystem::path& path);

// Always writes IEEE float32. Output bytes depend only on the samples.
void write_wav(const std::filesystem::path& path, const MultiSignal& channels, double sample_rate);

}  // namespace farsep
