#pragma once

#include <string>

#include "topokern/dsp.hpp"

namespace topokern::io {

/// Reads a RIFF/WAVE file, PCM 16-bit, mono or stereo (stereo is averaged
/// to mono). Samples scaled by 1/32768.
dsp::Signal readWavMono(const std::string& path);

/// Writes mono PCM 16-bit; samples are rounded to the nearest level and
/// clamped to the int16 range.
void writeWavMono(const std::string& path, const dsp::Signal& signal);

} // namespace topokern::io
