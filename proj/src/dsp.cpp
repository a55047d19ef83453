#include "topokern/dsp.hpp"

#include <cmath>

#include "topokern/error.hpp"
#include "topokern/rng.hpp"

namespace topokern::dsp {

std::vector<double> hammingWindow(std::size_t n) {
    if (n == 0) fail(ErrorCode::BadConfig, "hammingWindow: n must be >= 1");
    if (n == 1) return {1.0};
    std::vector<double> w(n);
    for (std::size_t k = 0; k <= (n - 1) / 2; ++k) {
        const double value =
            0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n - 1));
        w[k] = value;
        w[n - 1 - k] = value;
    }
    return w;
}

namespace {

bool isPowerOfTwo(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT (decimation in time).
void fftRadix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wBase(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto even = a[i + k];
                const auto odd = a[i + k + len / 2] * w;
                a[i + k] = even + odd;
                a[i + k + len / 2] = even - odd;
                w *= wBase;
            }
        }
    }
}

// Direct DFT for non-power-of-two frame lengths.
std::vector<std::complex<double>> dftDirect(const std::vector<std::complex<double>>& in) {
    const std::size_t n = in.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> sum(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = -2.0 * M_PI * static_cast<double>(k) *
                                 static_cast<double>(t) / static_cast<double>(n);
            sum += in[t] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[k] = sum;
    }
    return out;
}

} // namespace

ComplexGrid stft(const Signal& s, std::size_t windowLen, std::size_t hop) {
    if (windowLen < 2) fail(ErrorCode::BadConfig, "stft: windowLen must be >= 2");
    if (hop < 1 || hop > windowLen)
        fail(ErrorCode::BadConfig, "stft: hop must be in [1, windowLen]");
    if (s.samples.size() < windowLen)
        fail(ErrorCode::SignalTooShort, "stft: signal shorter than the analysis window");

    const std::size_t frames = (s.samples.size() - windowLen) / hop + 1;
    const std::size_t bins = windowLen / 2 + 1;
    const auto window = hammingWindow(windowLen);

    ComplexGrid grid;
    grid.bins = bins;
    grid.frames = frames;
    grid.values.resize(bins * frames);
    grid.binHz = static_cast<double>(s.sampleRateHz) / static_cast<double>(windowLen);
    grid.hopSeconds = static_cast<double>(hop) / static_cast<double>(s.sampleRateHz);

    std::vector<std::complex<double>> frame(windowLen);
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t start = f * hop;
        for (std::size_t k = 0; k < windowLen; ++k)
            frame[k] = {s.samples[start + k] * window[k], 0.0};
        if (isPowerOfTwo(windowLen)) {
            fftRadix2(frame);
            for (std::size_t b = 0; b < bins; ++b) grid.at(b, f) = frame[b];
        } else {
            const auto spectrum = dftDirect(frame);
            for (std::size_t b = 0; b < bins; ++b) grid.at(b, f) = spectrum[b];
        }
    }
    return grid;
}

Spectrogram logMagnitudeSpectrogram(const ComplexGrid& grid) {
    if (grid.values.empty())
        fail(ErrorCode::BadConfig, "logMagnitudeSpectrogram: empty grid");
    Spectrogram spec;
    spec.bins = grid.bins;
    spec.frames = grid.frames;
    spec.binHz = grid.binHz;
    spec.hopSeconds = grid.hopSeconds;
    spec.values.resize(grid.values.size());
    for (std::size_t i = 0; i < grid.values.size(); ++i)
        spec.values[i] = std::log(std::abs(grid.values[i]) + kLogFloor);
    return spec;
}

double signalPower(const Signal& s) {
    if (s.samples.empty()) return 0.0;
    double sum = 0.0;
    for (double v : s.samples) sum += v * v;
    return sum / static_cast<double>(s.samples.size());
}

Signal addAWGN(const Signal& s, double snrDb, std::uint64_t seed) {
    if (s.samples.empty()) fail(ErrorCode::ZeroSignal, "addAWGN: empty signal");
    const double pSignal = signalPower(s);
    if (pSignal <= 0.0)
        fail(ErrorCode::ZeroSignal, "addAWGN: zero-power signal, SNR undefined");

    const double pNoise = pSignal / std::pow(10.0, snrDb / 10.0);

    GaussianSampler gaussian(seed);
    std::vector<double> noise(s.samples.size());
    double drawnPower = 0.0;
    for (double& v : noise) {
        v = gaussian.next();
        drawnPower += v * v;
    }
    drawnPower /= static_cast<double>(noise.size());
    const double scale = std::sqrt(pNoise / drawnPower);

    Signal out = s;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] += scale * noise[i];
    return out;
}

double measureSNR(const Signal& clean, const Signal& noisy) {
    if (clean.samples.size() != noisy.samples.size() ||
        clean.sampleRateHz != noisy.sampleRateHz)
        fail(ErrorCode::LengthMismatch, "measureSNR: signals differ in length or rate");
    const double pClean = signalPower(clean);
    if (pClean <= 0.0) fail(ErrorCode::ZeroSignal, "measureSNR: zero-power reference");

    double pResidual = 0.0;
    for (std::size_t i = 0; i < clean.samples.size(); ++i) {
        const double d = noisy.samples[i] - clean.samples[i];
        pResidual += d * d;
    }
    pResidual /= static_cast<double>(clean.samples.size());
    if (pResidual == 0.0) return kSnrSentinelDb;
    return 10.0 * std::log10(pClean / pResidual);
}

} // namespace topokern::dsp
