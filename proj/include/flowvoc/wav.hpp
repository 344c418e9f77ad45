#pragma once

#include <string>
#include <vector>

namespace flowvoc::wav {

struct WavData {
    std::vector<float> samples;  // mono, [-1, 1] nominal
    int sample_rate = 0;
};

// Reads 16-bit PCM or 32-bit IEEE float WAV. Multichannel input is downmixed
// by averaging (logged as a warning).
WavData read_wav(const std::string& path);

enum class WavFormat { Pcm16, Float32 };

void write_wav(const std::string& path, const std::vector<float>& samples,
               int sample_rate, WavFormat fmt = WavFormat::Float32);

}  // namespace flowvoc::wav
