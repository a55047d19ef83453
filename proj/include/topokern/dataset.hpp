#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topokern/dsp.hpp"

namespace topokern::data {

struct LabeledClip {
    dsp::Signal signal;
    int label = 0;
    std::string className;
};

struct DatasetManifest {
    std::string root;
    std::vector<std::pair<std::string, std::string>> entries; // (relative path, class)
    std::vector<std::string> classNames;                      // sorted, defines label order
};

inline constexpr int kSynthClassCount = 6;

/// Class names for the synthetic corpus, indexed by class.
const char* synthClassName(int classIndex);

/// Deterministic synthetic clip for one of six time-frequency patterns:
///   0 steady tone, 1 click train, 2 up-chirp, 3 down-chirp,
///   4 two-tone chord, 5 band-limited noise.
/// Base frequency jitters +-10%, amplitude +-3 dB, phase uniformly,
/// all drawn from (classIndex, seed).
LabeledClip synthClip(int classIndex, double durationS, int sampleRateHz,
                      std::uint64_t seed);

/// Per class keeps min(count, capPerClass) clips chosen by seeded shuffle;
/// surviving clips keep their original relative order.
std::vector<LabeledClip> balanceClasses(const std::vector<LabeledClip>& clips,
                                        int capPerClass, std::uint64_t seed);

/// Stratified split; val gets round(valFraction * classSize) clips per class.
/// Original relative order preserved inside each part.
std::pair<std::vector<LabeledClip>, std::vector<LabeledClip>>
splitTrainVal(const std::vector<LabeledClip>& clips, double valFraction,
              std::uint64_t seed);

/// Parses root/labels.csv (header "path,class") and validates every path.
DatasetManifest loadManifest(const std::string& root);

/// Loads every manifest entry as a clip; labels follow the sorted classNames.
std::vector<LabeledClip> loadClips(const DatasetManifest& manifest);

/// Center-crop or zero-pad to exactly targetSamples.
dsp::Signal fitToLength(const dsp::Signal& s, std::size_t targetSamples);

} // namespace topokern::data
