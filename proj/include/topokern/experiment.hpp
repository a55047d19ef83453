#pragma once

#include <optional>
#include <string>
#include <vector>

#include "topokern/dataset.hpp"
#include "topokern/filter_bank.hpp"
#include "topokern/nn.hpp"

namespace topokern::experiment {

struct BankConfig {
    banks::BankKind kind = banks::BankKind::OF;
    double alpha = 1.0;
    double sigma = 0.5;
    std::uint64_t seed = 42;
};

struct SynthConfig {
    int perClass = 200;
    double durationS = 0.4;
    int sampleRateHz = 16000;
    std::uint64_t seed = 7;
};

struct ExperimentConfig {
    std::optional<BankConfig> bank;  // layer-1 init; absent = random init
    std::optional<double> snrDb;     // train-split AWGN; absent = clean
    std::optional<SynthConfig> synth;
    std::optional<std::string> manifestRoot;
    std::optional<int> balanceCap;
    double valFraction = 0.2;
    std::size_t windowLen = dsp::kDefaultWindowLen;
    std::size_t hop = dsp::kDefaultHop;
    double clipDurationS = 0.4;
    bool normalizeSpectrograms = true;
    nn::ModelConfig model;
    std::string metricsPath;
    std::string modelDir;
    std::uint64_t runSeed = 42;
};

struct MetricsRow {
    int epoch = 0;
    bool isVal = false;
    double loss = 0.0;
    double accuracy = 0.0;
};

struct ExperimentResult {
    std::vector<MetricsRow> rows;
    std::vector<std::string> classNames;
    nn::Metrics finalVal;
    // checksums of the raw split audio, for isolation checks
    std::uint64_t trainAudioHash = 0;
    std::uint64_t valAudioHash = 0;
};

ExperimentConfig configFromJson(const std::string& text);
ExperimentConfig configFromFile(const std::string& path);

/// Split -> optional train-split AWGN -> STFT -> train, evaluating the
/// validation split each epoch. Writes the metrics CSV row by row (flushed
/// per epoch) when metricsPath is set, and the final model when modelDir is
/// set. Fully reproducible given the config.
ExperimentResult runExperiment(const ExperimentConfig& config);

/// Deterministic spectrogram tensor for one clip (fit to length, STFT,
/// log-magnitude, optional per-clip standardization).
nn::Sample<float> clipToSample(const data::LabeledClip& clip,
                               const ExperimentConfig& config);

/// Model directory: manifest.json plus one TNS1 file per parameter tensor.
void saveModel(const std::string& dir, const nn::Model<float>& model,
               const std::vector<std::string>& classNames);
nn::Model<float> loadModel(const std::string& dir);

std::string metricsCsv(const std::vector<MetricsRow>& rows);

} // namespace topokern::experiment
