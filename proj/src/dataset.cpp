#include "topokern/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "topokern/error.hpp"
#include "topokern/rng.hpp"
#include "topokern/wav.hpp"

namespace topokern::data {

const char* synthClassName(int classIndex) {
    static const char* names[kSynthClassCount] = {"tone",  "clicks", "chirp_up",
                                                  "chirp_down", "chord", "noiseband"};
    if (classIndex < 0 || classIndex >= kSynthClassCount)
        fail(ErrorCode::BadClass, "synth class index out of range");
    return names[classIndex];
}

namespace {

struct Jitter {
    double freqScale;  // 1 +- 10%
    double amplitude;  // base +- 3 dB
    double phase;      // [0, 2pi)
    Xoshiro256StarStar rng;

    Jitter(int classIndex, std::uint64_t seed, double baseAmplitude)
        : rng(deriveSeed(seed, 101 + static_cast<std::uint64_t>(classIndex))) {
        freqScale = 1.0 + 0.1 * (2.0 * rng.uniform() - 1.0);
        amplitude = baseAmplitude * std::pow(10.0, 3.0 * (2.0 * rng.uniform() - 1.0) / 20.0);
        phase = 2.0 * M_PI * rng.uniform();
    }
};

} // namespace

LabeledClip synthClip(int classIndex, double durationS, int sampleRateHz,
                      std::uint64_t seed) {
    if (classIndex < 0 || classIndex >= kSynthClassCount)
        fail(ErrorCode::BadClass, "synthClip: class index out of range");
    if (durationS < 0.2)
        fail(ErrorCode::BadConfig, "synthClip: duration must be >= 0.2 s");
    if (sampleRateHz <= 0) fail(ErrorCode::BadConfig, "synthClip: bad sample rate");

    const auto n = static_cast<std::size_t>(durationS * sampleRateHz);
    const double dt = 1.0 / sampleRateHz;

    LabeledClip clip;
    clip.label = classIndex;
    clip.className = synthClassName(classIndex);
    clip.signal.sampleRateHz = sampleRateHz;
    clip.signal.samples.assign(n, 0.0);
    auto& x = clip.signal.samples;

    Jitter jit(classIndex, seed, 0.35);

    switch (classIndex) {
        case 0: { // steady tone: one horizontal spectrogram ridge
            const double f0 = 1000.0 * jit.freqScale;
            for (std::size_t i = 0; i < n; ++i)
                x[i] = jit.amplitude * std::sin(2.0 * M_PI * f0 * i * dt + jit.phase);
            break;
        }
        case 1: { // click train: vertical ridges over a faint noise floor
            const double rate = 10.0 * jit.freqScale;
            const auto period = static_cast<std::size_t>(sampleRateHz / rate);
            const std::size_t offset = static_cast<std::size_t>(jit.rng.below(period / 2));
            for (std::size_t i = 0; i < n; ++i)
                x[i] = 0.004 * (2.0 * jit.rng.uniform() - 1.0);
            for (std::size_t start = offset; start + 8 < n; start += period)
                for (std::size_t k = 0; k < 8; ++k)
                    x[start + k] += jit.amplitude * 2.0 * std::exp(-0.5 * k) *
                                    (k % 2 == 0 ? 1.0 : -1.0);
            break;
        }
        case 2:   // up-chirp
        case 3: { // down-chirp
            double fStart = 600.0 * jit.freqScale;
            double fEnd = 2600.0 * jit.freqScale;
            if (classIndex == 3) std::swap(fStart, fEnd);
            const double sweep = (fEnd - fStart) / durationS;
            for (std::size_t i = 0; i < n; ++i) {
                const double t = i * dt;
                x[i] = jit.amplitude *
                       std::sin(2.0 * M_PI * (fStart * t + 0.5 * sweep * t * t) + jit.phase);
            }
            break;
        }
        case 4: { // two-tone chord
            const double f0 = 800.0 * jit.freqScale;
            const double f1 = 1900.0 * jit.freqScale;
            const double phase2 = 2.0 * M_PI * jit.rng.uniform();
            const double a = jit.amplitude / std::sqrt(2.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double t = i * dt;
                x[i] = a * (std::sin(2.0 * M_PI * f0 * t + jit.phase) +
                            std::sin(2.0 * M_PI * f1 * t + phase2));
            }
            break;
        }
        case 5: { // band-limited noise: random sinusoids in [900, 2100] * jitter
            constexpr int kComponents = 48;
            const double lo = 900.0 * jit.freqScale;
            const double hi = 2100.0 * jit.freqScale;
            const double a = jit.amplitude / std::sqrt(static_cast<double>(kComponents));
            double freqs[kComponents], phases[kComponents];
            for (int c = 0; c < kComponents; ++c) {
                freqs[c] = lo + (hi - lo) * jit.rng.uniform();
                phases[c] = 2.0 * M_PI * jit.rng.uniform();
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double t = i * dt;
                double sum = 0.0;
                for (int c = 0; c < kComponents; ++c)
                    sum += std::sin(2.0 * M_PI * freqs[c] * t + phases[c]);
                x[i] = a * sum;
            }
            break;
        }
        default: break;
    }
    return clip;
}

namespace {

std::map<int, std::vector<std::size_t>> indicesByLabel(const std::vector<LabeledClip>& clips) {
    std::map<int, std::vector<std::size_t>> byLabel;
    for (std::size_t i = 0; i < clips.size(); ++i) byLabel[clips[i].label].push_back(i);
    return byLabel;
}

} // namespace

std::vector<LabeledClip> balanceClasses(const std::vector<LabeledClip>& clips,
                                        int capPerClass, std::uint64_t seed) {
    if (capPerClass < 1) fail(ErrorCode::BadConfig, "balanceClasses: cap must be >= 1");
    auto byLabel = indicesByLabel(clips);

    std::vector<bool> keep(clips.size(), false);
    Xoshiro256StarStar rng(seed);
    for (auto& [label, indices] : byLabel) {
        auto shuffled = indices;
        shuffleSeeded(shuffled, rng);
        const std::size_t take =
            std::min(indices.size(), static_cast<std::size_t>(capPerClass));
        for (std::size_t i = 0; i < take; ++i) keep[shuffled[i]] = true;
    }

    std::vector<LabeledClip> out;
    for (std::size_t i = 0; i < clips.size(); ++i)
        if (keep[i]) out.push_back(clips[i]);
    return out;
}

std::pair<std::vector<LabeledClip>, std::vector<LabeledClip>>
splitTrainVal(const std::vector<LabeledClip>& clips, double valFraction,
              std::uint64_t seed) {
    if (valFraction <= 0.0 || valFraction >= 1.0)
        fail(ErrorCode::BadConfig, "splitTrainVal: fraction must be in (0, 1)");
    auto byLabel = indicesByLabel(clips);

    std::vector<bool> isVal(clips.size(), false);
    Xoshiro256StarStar rng(seed);
    for (auto& [label, indices] : byLabel) {
        const auto valCount =
            static_cast<std::size_t>(std::lround(valFraction * static_cast<double>(indices.size())));
        if (valCount == 0 || valCount == indices.size())
            fail(ErrorCode::TooFewSamples,
                 "splitTrainVal: class '" + clips[indices[0]].className +
                     "' would get an empty split");
        auto shuffled = indices;
        shuffleSeeded(shuffled, rng);
        for (std::size_t i = 0; i < valCount; ++i) isVal[shuffled[i]] = true;
    }

    std::vector<LabeledClip> train, val;
    for (std::size_t i = 0; i < clips.size(); ++i)
        (isVal[i] ? val : train).push_back(clips[i]);
    return {train, val};
}

DatasetManifest loadManifest(const std::string& root) {
    namespace fs = std::filesystem;
    const fs::path labels = fs::path(root) / "labels.csv";
    std::ifstream in(labels);
    if (!in) fail(ErrorCode::MissingLabels, "no labels.csv under " + root);

    DatasetManifest manifest;
    manifest.root = root;

    std::string line;
    if (!std::getline(in, line))
        fail(ErrorCode::MissingLabels, "labels.csv is empty: " + labels.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "path,class")
        fail(ErrorCode::ParseError, "labels.csv must start with header 'path,class'");

    std::set<std::string> seen, classes;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0 || comma + 1 >= line.size())
            fail(ErrorCode::ParseError, "labels.csv: malformed row '" + line + "'");
        const std::string path = line.substr(0, comma);
        const std::string className = line.substr(comma + 1);
        if (!seen.insert(path).second)
            fail(ErrorCode::DuplicatePath, "labels.csv: duplicate path " + path);
        if (!fs::exists(fs::path(root) / path))
            fail(ErrorCode::DanglingPath, "labels.csv references missing file " + path);
        manifest.entries.emplace_back(path, className);
        classes.insert(className);
    }
    manifest.classNames.assign(classes.begin(), classes.end()); // std::set is sorted
    return manifest;
}

std::vector<LabeledClip> loadClips(const DatasetManifest& manifest) {
    namespace fs = std::filesystem;
    std::vector<LabeledClip> clips;
    clips.reserve(manifest.entries.size());
    for (const auto& [path, className] : manifest.entries) {
        LabeledClip clip;
        clip.signal = io::readWavMono((fs::path(manifest.root) / path).string());
        clip.className = className;
        const auto it = std::lower_bound(manifest.classNames.begin(),
                                         manifest.classNames.end(), className);
        clip.label = static_cast<int>(it - manifest.classNames.begin());
        clips.push_back(std::move(clip));
    }
    return clips;
}

dsp::Signal fitToLength(const dsp::Signal& s, std::size_t targetSamples) {
    dsp::Signal out;
    out.sampleRateHz = s.sampleRateHz;
    out.samples.assign(targetSamples, 0.0);
    if (s.samples.size() >= targetSamples) {
        const std::size_t start = (s.samples.size() - targetSamples) / 2;
        std::copy_n(s.samples.begin() + static_cast<std::ptrdiff_t>(start), targetSamples,
                    out.samples.begin());
    } else {
        const std::size_t start = (targetSamples - s.samples.size()) / 2;
        std::copy(s.samples.begin(), s.samples.end(),
                  out.samples.begin() + static_cast<std::ptrdiff_t>(start));
    }
    return out;
}

} // namespace topokern::data
