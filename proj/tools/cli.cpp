// topokern command line: filter-bank generation, kernel inspection,
// synthetic corpus generation, noise injection, STFT export, and the full
// training/evaluation experiment loop.
//
// Exit codes: 0 success, 1 runtime error, 2 usage/configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "topokern/dataset.hpp"
#include "topokern/error.hpp"
#include "topokern/experiment.hpp"
#include "topokern/filter_bank.hpp"
#include "topokern/kernel_geometry.hpp"
#include "topokern/tns.hpp"
#include "topokern/wav.hpp"

namespace {

using namespace topokern;
namespace fs = std::filesystem;

bool isUsageError(ErrorCode code) {
    return code == ErrorCode::BadConfig || code == ErrorCode::ParseError ||
           code == ErrorCode::MissingLabels;
}

int cmdGenBank(const std::string& kindName, int count, double alpha, double sigma,
               std::uint64_t seed, const std::string& outPath) {
    const auto kind = banks::bankKindFromName(kindName);
    const auto bank = banks::generateBank(kind, count, alpha, sigma, seed);
    banks::saveBank(bank, outPath);

    std::printf("wrote %s: kind=%s count=%zu alpha=%g sigma=%g seed=%llu\n",
                outPath.c_str(), banks::bankKindName(kind), bank.kernels.size(),
                bank.alpha, bank.sigma, static_cast<unsigned long long>(bank.seed));
    std::printf("%-6s %-12s %-12s\n", "idx", "norm", "contrast");
    for (std::size_t i = 0; i < bank.kernels.size(); ++i)
        std::printf("%-6zu %-12.6f %-12.6f\n", i, geometry::kernelNorm(bank.kernels[i]),
                    geometry::contrast(bank.kernels[i]));
    return 0;
}

int cmdInspect(const std::string& kernelPath) {
    const auto kernel = geometry::readKernelFile(kernelPath);
    std::printf("kernel %s\n%s", kernelPath.c_str(),
                geometry::formatKernelText(kernel).c_str());
    std::printf("norm      %.12g\n", geometry::kernelNorm(kernel));
    std::printf("contrast  %.12g\n", geometry::contrast(kernel));

    const bool member = geometry::isInM(kernel, 1e-6);
    std::printf("in M      %s\n", member ? "yes" : "no");
    if (member) {
        const auto q = geometry::quotientCoords(kernel);
        std::printf("coords    x=%.12g y=%.12g z=%.12g\n", q.x, q.y, q.z);
        std::printf("in disk   %s\n", geometry::inQuotientDisk(q.x, q.y) ? "yes" : "no");
        const auto stratum = geometry::classifyStratum(kernel, geometry::kGeomTol);
        std::printf("stratum   %s (fiber %s)\n", geometry::stratumName(stratum),
                    geometry::stratumFiber(stratum));
    } else {
        try {
            const auto projected = geometry::projectToM(kernel);
            std::printf("not in M; projectToM would give:\n%s",
                        geometry::formatKernelText(projected).c_str());
        } catch (const Error& e) {
            std::printf("not in M and not projectable: %s\n", e.what());
        }
    }
    return 0;
}

int cmdProject(const std::string& inPath, const std::string& outPath) {
    const auto kernel = geometry::readKernelFile(inPath);
    const auto projected = geometry::projectToM(kernel);
    geometry::writeKernelFile(outPath, projected);
    std::printf("projected %s -> %s (norm %.12g, column-sum %.3g)\n", inPath.c_str(),
                outPath.c_str(), geometry::kernelNorm(projected),
                (projected.v1() + projected.v2() + projected.v3()).norm());
    return 0;
}

int cmdNoise(const std::string& inPath, const std::string& outPath, double snrDb,
             std::uint64_t seed) {
    const auto clean = io::readWavMono(inPath);
    const auto noisy = dsp::addAWGN(clean, snrDb, seed);
    io::writeWavMono(outPath, noisy);
    std::printf("wrote %s: requested %.2f dB, realized %.4f dB (pre-quantization)\n",
                outPath.c_str(), snrDb, dsp::measureSNR(clean, noisy));
    return 0;
}

int cmdStft(const std::string& inPath, const std::string& outPath,
            std::size_t windowLen, std::size_t hop) {
    const auto signal = io::readWavMono(inPath);
    const auto spec = dsp::logMagnitudeSpectrogram(dsp::stft(signal, windowLen, hop));

    io::TnsTensor t;
    t.dims = {static_cast<std::uint32_t>(spec.bins), static_cast<std::uint32_t>(spec.frames)};
    t.values.reserve(spec.values.size());
    for (double v : spec.values) t.values.push_back(static_cast<float>(v));
    io::writeTns(outPath, t);
    std::printf("wrote %s: %zu bins x %zu frames (bin %.2f Hz, hop %.4f s)\n",
                outPath.c_str(), spec.bins, spec.frames, spec.binHz, spec.hopSeconds);
    return 0;
}

int cmdSynth(const std::string& outDir, int perClass, double durationS, int fs,
             std::uint64_t seed) {
    if (perClass < 1) fail(ErrorCode::BadConfig, "synth: --per-class must be >= 1");
    fs::create_directories(outDir);
    std::ofstream labels(fs::path(outDir) / "labels.csv", std::ios::binary);
    if (!labels) fail(ErrorCode::IoError, "cannot write labels.csv in " + outDir);
    labels << "path,class\n";

    for (int i = 0; i < perClass; ++i) {
        const std::uint64_t clipSeed = deriveSeed(seed, static_cast<std::uint64_t>(i));
        for (int c = 0; c < data::kSynthClassCount; ++c) {
            const auto clip = data::synthClip(c, durationS, fs, clipSeed);
            char name[64];
            std::snprintf(name, sizeof name, "%s_%04d.wav", clip.className.c_str(), i);
            io::writeWavMono((fs::path(outDir) / name).string(), clip.signal);
            labels << name << ',' << clip.className << '\n';
        }
    }
    std::printf("wrote %d clips x %d classes under %s\n", perClass,
                data::kSynthClassCount, outDir.c_str());
    return 0;
}

int cmdRun(const std::string& configPath) {
    const auto config = experiment::configFromFile(configPath);
    const auto result = experiment::runExperiment(config);
    for (const auto& row : result.rows)
        std::printf("epoch %2d %-5s loss %.6f acc %.4f\n", row.epoch,
                    row.isVal ? "val" : "train", row.loss, row.accuracy);
    if (!config.metricsPath.empty())
        std::printf("metrics: %s\n", config.metricsPath.c_str());
    if (!config.modelDir.empty()) std::printf("model: %s\n", config.modelDir.c_str());
    std::printf("final val loss %.6f acc %.4f\n", result.finalVal.loss,
                result.finalVal.accuracy);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"topokern: topology-structured convolution kernels and a "
                 "spectrogram CNN harness"};
    app.require_subcommand(1);

    // gen-bank
    auto* genBank = app.add_subcommand("gen-bank", "generate a filter bank file");
    std::string kind = "of", outPath;
    int count = 64;
    double alpha = 1.0, sigma = 0.5;
    std::uint64_t seed = 42;
    genBank->add_option("--kind", kind, "of|of-nonorth|kf|cf|random");
    genBank->add_option("--count", count, "number of kernels")->required();
    genBank->add_option("--alpha", alpha, "scaling factor");
    genBank->add_option("--sigma", sigma, "rotation sampling spread");
    genBank->add_option("--seed", seed, "generator seed");
    genBank->add_option("--out", outPath, "output JSON path")->required();

    // inspect
    auto* inspect = app.add_subcommand("inspect", "report kernel geometry");
    std::string kernelPath;
    inspect->add_option("kernel", kernelPath, "kernel text file")->required();

    // project
    auto* project = app.add_subcommand("project", "project a kernel onto M");
    std::string projectIn, projectOut;
    project->add_option("kernel", projectIn, "kernel text file")->required();
    project->add_option("--out", projectOut, "output kernel path")->required();

    // noise
    auto* noise = app.add_subcommand("noise", "add calibrated AWGN to a WAV");
    std::string noiseIn, noiseOut;
    double snrDb = 20.0;
    std::uint64_t noiseSeed = 0;
    noise->add_option("--in", noiseIn)->required();
    noise->add_option("--out", noiseOut)->required();
    noise->add_option("--snr-db", snrDb, "target SNR in dB")->required();
    noise->add_option("--seed", noiseSeed);

    // stft
    auto* stft = app.add_subcommand("stft", "write a log-magnitude spectrogram (TNS1)");
    std::string stftIn, stftOut;
    std::size_t windowLen = dsp::kDefaultWindowLen, hop = dsp::kDefaultHop;
    stft->add_option("--in", stftIn)->required();
    stft->add_option("--out", stftOut)->required();
    stft->add_option("--window", windowLen);
    stft->add_option("--hop", hop);

    // synth
    auto* synth = app.add_subcommand("synth", "write a synthetic labeled corpus");
    std::string synthDir;
    int perClass = 200;
    double durationS = 0.4;
    int sampleRate = 16000;
    std::uint64_t synthSeed = 7;
    synth->add_option("--out", synthDir)->required();
    synth->add_option("--per-class", perClass);
    synth->add_option("--duration", durationS, "seconds");
    synth->add_option("--fs", sampleRate, "sample rate in Hz");
    synth->add_option("--seed", synthSeed);

    // run
    auto* run = app.add_subcommand("run", "run a training experiment from a config");
    std::string configPath;
    run->add_option("config", configPath, "experiment config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (genBank->parsed()) return cmdGenBank(kind, count, alpha, sigma, seed, outPath);
        if (inspect->parsed()) return cmdInspect(kernelPath);
        if (project->parsed()) return cmdProject(projectIn, projectOut);
        if (noise->parsed()) return cmdNoise(noiseIn, noiseOut, snrDb, noiseSeed);
        if (stft->parsed()) return cmdStft(stftIn, stftOut, windowLen, hop);
        if (synth->parsed()) return cmdSynth(synthDir, perClass, durationS, sampleRate, synthSeed);
        if (run->parsed()) return cmdRun(configPath);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return isUsageError(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
