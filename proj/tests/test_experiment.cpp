#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "topokern/error.hpp"
#include "topokern/experiment.hpp"

using namespace topokern;
using namespace topokern::experiment;
namespace fs = std::filesystem;

namespace {

// Small-but-real configuration: full pipeline, desk-scale sizes.
ExperimentConfig tinyConfig(std::uint64_t runSeed) {
    ExperimentConfig cfg;
    SynthConfig synth;
    synth.perClass = 10;
    synth.durationS = 0.25;
    cfg.synth = synth;
    cfg.clipDurationS = 0.25;
    cfg.windowLen = 64;
    cfg.hop = 32;
    cfg.model.conv1Filters = 8;
    cfg.model.conv2Filters = 8;
    cfg.model.denseUnits = 16;
    cfg.model.epochs = 2;
    cfg.runSeed = runSeed;
    BankConfig bank;
    bank.sigma = 0.5;
    bank.seed = 42;
    cfg.bank = bank;
    return cfg;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("config JSON: defaults, overrides, validation") {
    const auto cfg = configFromJson(R"({
        "data": {"synth": {"perClass": 5, "durationS": 0.3, "seed": 9}},
        "bank": {"kind": "kf", "alpha": 1.0, "sigma": 0.25, "seed": 3},
        "snrDb": 10.0,
        "model": {"conv1Filters": 4, "epochs": 3},
        "runSeed": 77
    })");
    REQUIRE(cfg.synth.has_value());
    CHECK(cfg.synth->perClass == 5);
    CHECK(cfg.synth->durationS == 0.3);
    REQUIRE(cfg.bank.has_value());
    CHECK(cfg.bank->kind == banks::BankKind::KF);
    REQUIRE(cfg.snrDb.has_value());
    CHECK(*cfg.snrDb == 10.0);
    CHECK(cfg.model.conv1Filters == 4);
    CHECK(cfg.model.epochs == 3);
    CHECK(cfg.model.conv2Filters == 64); // untouched default
    CHECK(cfg.runSeed == 77);
    CHECK(cfg.windowLen == 256);
    CHECK(cfg.hop == 128);

    CHECK_THROWS_AS(configFromJson("{}"), Error);    // no data source
    CHECK_THROWS_AS(configFromJson("{oops"), Error); // malformed
}

TEST_CASE("runExperiment: metrics schema, determinism, CSV bytes") {
    const auto dir = fs::temp_directory_path() / "topokern_exp_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    auto cfg = tinyConfig(11);
    cfg.metricsPath = (dir / "metrics.csv").string();
    const auto r1 = runExperiment(cfg);

    // schema: one train + one val row per epoch, contiguous epochs from 1
    REQUIRE(r1.rows.size() == 4);
    CHECK(r1.rows[0].epoch == 1);
    CHECK_FALSE(r1.rows[0].isVal);
    CHECK(r1.rows[1].epoch == 1);
    CHECK(r1.rows[1].isVal);
    CHECK(r1.rows[2].epoch == 2);
    CHECK(r1.rows[3].epoch == 2);
    for (const auto& row : r1.rows) {
        CHECK(row.accuracy >= 0.0);
        CHECK(row.accuracy <= 1.0);
        CHECK(std::isfinite(row.loss));
    }

    const std::string csv1 = slurp(cfg.metricsPath);
    CHECK(csv1.substr(0, 28) == "epoch,split,loss,accuracy\n1,");
    CHECK(csv1 == metricsCsv(r1.rows));

    // identical config -> byte-identical CSV
    cfg.metricsPath = (dir / "metrics2.csv").string();
    const auto r2 = runExperiment(cfg);
    CHECK(slurp(cfg.metricsPath) == csv1);
    CHECK(r2.finalVal.loss == r1.finalVal.loss);
    CHECK(r2.finalVal.accuracy == r1.finalVal.accuracy);

    // different run seed -> different trajectory (same dataset)
    auto other = tinyConfig(12);
    const auto r3 = runExperiment(other);
    CHECK(r3.rows.size() == 4);
    CHECK(metricsCsv(r3.rows) != csv1);

    fs::remove_all(dir);
}

TEST_CASE("noise isolation: validation bytes identical between clean and noisy") {
    auto clean = tinyConfig(21);
    auto noisy = tinyConfig(21);
    noisy.snrDb = 0.0;

    const auto rClean = runExperiment(clean);
    const auto rNoisy = runExperiment(noisy);
    CHECK(rClean.valAudioHash == rNoisy.valAudioHash);
    CHECK(rClean.trainAudioHash != rNoisy.trainAudioHash);
}

TEST_CASE("model save/load round-trips parameters exactly") {
    const auto dir = fs::temp_directory_path() / "topokern_model_test";
    fs::remove_all(dir);

    auto cfg = tinyConfig(31);
    cfg.modelDir = (dir / "model").string();
    runExperiment(cfg);

    CHECK(fs::exists(fs::path(cfg.modelDir) / "manifest.json"));
    auto model = loadModel(cfg.modelDir);
    CHECK(model.config.conv1Filters == 8);

    // saving again reproduces identical tensor files
    const auto dir2 = (dir / "model2").string();
    saveModel(dir2, model, {"a", "b", "c", "d", "e", "f"});
    for (const char* name :
         {"conv1.kernels", "conv1.bias", "conv2.kernels", "conv2.bias",
          "dense1.weights", "dense1.bias", "dense2.weights", "dense2.bias"}) {
        const auto f1 = slurp(fs::path(cfg.modelDir) / (std::string(name) + ".tns"));
        const auto f2 = slurp(fs::path(dir2) / (std::string(name) + ".tns"));
        CHECK(f1 == f2);
        CHECK(!f1.empty());
    }

    auto again = loadModel(cfg.modelDir);
    CHECK(again.conv1.kernels.data == model.conv1.kernels.data);
    CHECK(again.dense2.bias.data == model.dense2.bias.data);

    fs::remove_all(dir);
}

TEST_CASE("clipToSample: shape follows the STFT geometry, standardized") {
    auto cfg = tinyConfig(1);
    const auto clip = data::synthClip(0, 0.25, 16000, 5);
    const auto sample = clipToSample(clip, cfg);
    REQUIRE(sample.input.shape.size() == 3);
    CHECK(sample.input.shape[0] == 1);
    CHECK(sample.input.shape[1] == 33); // 64/2 + 1 bins
    const std::size_t samples = 4000;   // 0.25 s at 16 kHz
    CHECK(sample.input.shape[2] == (samples - 64) / 32 + 1);

    double mean = 0.0;
    for (float v : sample.input.data) mean += v;
    mean /= static_cast<double>(sample.input.size());
    CHECK(std::abs(mean) <= 1e-4);
}
