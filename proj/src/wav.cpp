#include "topokern/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "topokern/error.hpp"

namespace topokern::io {

namespace {

std::uint32_t leU32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t leU16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void putLE32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void putLE16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

} // namespace

dsp::Signal readWavMono(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open WAV file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());

    if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        fail(ErrorCode::CorruptHeader, "not a RIFF/WAVE file: " + path);

    std::uint16_t format = 0, channels = 0, bitsPerSample = 0;
    std::uint32_t sampleRate = 0;
    bool haveFmt = false;
    const unsigned char* dataPtr = nullptr;
    std::uint32_t dataLen = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::uint32_t chunkLen = leU32(chunk + 4);
        const std::size_t body = pos + 8;
        if (body + chunkLen > bytes.size())
            fail(ErrorCode::CorruptHeader, "truncated chunk in " + path);

        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (chunkLen < 16) fail(ErrorCode::CorruptHeader, "short fmt chunk in " + path);
            format = leU16(bytes.data() + body);
            channels = leU16(bytes.data() + body + 2);
            sampleRate = leU32(bytes.data() + body + 4);
            bitsPerSample = leU16(bytes.data() + body + 14);
            haveFmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            dataPtr = bytes.data() + body;
            dataLen = chunkLen;
        }
        pos = body + chunkLen + (chunkLen & 1); // chunks are word-aligned
    }

    if (!haveFmt || dataPtr == nullptr)
        fail(ErrorCode::CorruptHeader, "missing fmt/data chunk in " + path);
    if (format != 1) fail(ErrorCode::UnsupportedFormat, "only PCM supported: " + path);
    if (bitsPerSample != 16)
        fail(ErrorCode::UnsupportedFormat, "only 16-bit samples supported: " + path);
    if (channels != 1 && channels != 2)
        fail(ErrorCode::UnsupportedFormat, "only mono/stereo supported: " + path);
    if (sampleRate == 0) fail(ErrorCode::CorruptHeader, "zero sample rate in " + path);

    const std::size_t frameBytes = std::size_t{2} * channels;
    const std::size_t frames = dataLen / frameBytes;

    dsp::Signal signal;
    signal.sampleRateHz = static_cast<int>(sampleRate);
    signal.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const unsigned char* f = dataPtr + i * frameBytes;
        const auto left = static_cast<std::int16_t>(leU16(f));
        if (channels == 1) {
            signal.samples[i] = left / 32768.0;
        } else {
            const auto right = static_cast<std::int16_t>(leU16(f + 2));
            signal.samples[i] = (left / 32768.0 + right / 32768.0) / 2.0;
        }
    }
    return signal;
}

void writeWavMono(const std::string& path, const dsp::Signal& signal) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write WAV file: " + path);

    const std::uint32_t dataLen = static_cast<std::uint32_t>(signal.samples.size() * 2);
    out.write("RIFF", 4);
    putLE32(out, 36 + dataLen);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    putLE32(out, 16);
    putLE16(out, 1); // PCM
    putLE16(out, 1); // mono
    putLE32(out, static_cast<std::uint32_t>(signal.sampleRateHz));
    putLE32(out, static_cast<std::uint32_t>(signal.sampleRateHz) * 2);
    putLE16(out, 2);
    putLE16(out, 16);
    out.write("data", 4);
    putLE32(out, dataLen);
    for (double v : signal.samples) {
        double scaled = std::lrint(v * 32768.0);
        scaled = std::min(32767.0, std::max(-32768.0, scaled));
        putLE16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    }
    if (!out) fail(ErrorCode::IoError, "WAV write failed: " + path);
}

} // namespace topokern::io
