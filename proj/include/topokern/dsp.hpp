#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace topokern::dsp {

/// Time-domain audio, amplitudes nominally in [-1, 1].
struct Signal {
    std::vector<double> samples;
    int sampleRateHz = 16000;
};

/// STFT output: frequency bins (rows) x time frames (cols), row-major.
struct ComplexGrid {
    std::size_t bins = 0;
    std::size_t frames = 0;
    std::vector<std::complex<double>> values;
    double binHz = 0.0;
    double hopSeconds = 0.0;

    std::complex<double>& at(std::size_t bin, std::size_t frame) {
        return values[bin * frames + frame];
    }
    std::complex<double> at(std::size_t bin, std::size_t frame) const {
        return values[bin * frames + frame];
    }
};

/// Log-magnitude spectrogram, same layout as the grid it came from.
struct Spectrogram {
    std::size_t bins = 0;
    std::size_t frames = 0;
    std::vector<double> values;
    double binHz = 0.0;
    double hopSeconds = 0.0;

    double& at(std::size_t bin, std::size_t frame) { return values[bin * frames + frame]; }
    double at(std::size_t bin, std::size_t frame) const { return values[bin * frames + frame]; }
};

/// w[k] = 0.54 - 0.46 cos(2 pi k / (n-1)); n = 1 gives [1.0].
/// Computed half-and-mirrored so w[k] == w[n-1-k] exactly.
std::vector<double> hammingWindow(std::size_t n);

/// Hamming-windowed DFT frames, hop-spaced, bins 0..windowLen/2 retained.
/// Frame count = floor((len - windowLen)/hop) + 1.
ComplexGrid stft(const Signal& s, std::size_t windowLen, std::size_t hop);

/// ln(|X| + 1e-10).
Spectrogram logMagnitudeSpectrogram(const ComplexGrid& grid);

inline constexpr std::size_t kDefaultWindowLen = 256;
inline constexpr std::size_t kDefaultHop = 128;
inline constexpr double kLogFloor = 1e-10;

/// Adds seeded Gaussian noise scaled so the realized noise power is exactly
/// P_signal / 10^(snrDb/10) (mean-square calibration removes the sampling
/// variance of a finite draw).
Signal addAWGN(const Signal& s, double snrDb, std::uint64_t seed);

/// 10 log10(P_clean / P_residual). Returns kSnrSentinelDb when the residual
/// is identically zero.
inline constexpr double kSnrSentinelDb = 300.0;
double measureSNR(const Signal& clean, const Signal& noisy);

/// Mean square of the samples.
double signalPower(const Signal& s);

} // namespace topokern::dsp
