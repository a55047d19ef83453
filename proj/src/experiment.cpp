#include "topokern/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "topokern/error.hpp"
#include "topokern/tns.hpp"

namespace topokern::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentConfig configFromJson(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("config JSON: ") + e.what());
    }

    try {
        ExperimentConfig cfg;
        if (doc.contains("bank") && !doc["bank"].is_null()) {
            const auto& b = doc["bank"];
            BankConfig bank;
            bank.kind = banks::bankKindFromName(b.value("kind", std::string("of")));
            bank.alpha = b.value("alpha", 1.0);
            bank.sigma = b.value("sigma", 0.5);
            bank.seed = b.value("seed", std::uint64_t(42));
            cfg.bank = bank;
        }
        if (doc.contains("snrDb") && !doc["snrDb"].is_null())
            cfg.snrDb = doc["snrDb"].get<double>();

        if (doc.contains("data")) {
            const auto& d = doc["data"];
            if (d.contains("synth")) {
                const auto& s = d["synth"];
                SynthConfig synth;
                synth.perClass = s.value("perClass", 200);
                synth.durationS = s.value("durationS", 0.4);
                synth.sampleRateHz = s.value("sampleRateHz", 16000);
                synth.seed = s.value("seed", std::uint64_t(7));
                cfg.synth = synth;
            }
            if (d.contains("manifestRoot"))
                cfg.manifestRoot = d["manifestRoot"].get<std::string>();
            if (d.contains("balanceCap")) cfg.balanceCap = d["balanceCap"].get<int>();
        }

        cfg.valFraction = doc.value("valFraction", 0.2);
        if (doc.contains("stft")) {
            cfg.windowLen = doc["stft"].value("windowLen", dsp::kDefaultWindowLen);
            cfg.hop = doc["stft"].value("hop", dsp::kDefaultHop);
        }
        cfg.clipDurationS = doc.value("clipDurationS", 0.4);
        cfg.normalizeSpectrograms = doc.value("normalizeSpectrograms", true);

        if (doc.contains("model")) {
            const auto& m = doc["model"];
            cfg.model.conv1Filters = m.value("conv1Filters", 64);
            cfg.model.conv2Filters = m.value("conv2Filters", 64);
            cfg.model.frozenFirstLayer = m.value("frozenFirstLayer", false);
            cfg.model.denseUnits = m.value("denseUnits", 64);
            cfg.model.numClasses = m.value("numClasses", 6);
            cfg.model.learningRate = m.value("learningRate", 0.01);
            cfg.model.momentum = m.value("momentum", 0.9);
            cfg.model.batchSize = m.value("batchSize", 32);
            cfg.model.epochs = m.value("epochs", 15);
        }

        cfg.metricsPath = doc.value("metricsPath", std::string());
        cfg.modelDir = doc.value("modelDir", std::string());
        cfg.runSeed = doc.value("runSeed", std::uint64_t(42));

        if (!cfg.synth && !cfg.manifestRoot)
            fail(ErrorCode::BadConfig, "config: need data.synth or data.manifestRoot");
        return cfg;
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("config JSON: ") + e.what());
    }
}

ExperimentConfig configFromFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return configFromJson(buf.str());
}

nn::Sample<float> clipToSample(const data::LabeledClip& clip,
                               const ExperimentConfig& config) {
    const auto target = static_cast<std::size_t>(
        std::lround(config.clipDurationS * clip.signal.sampleRateHz));
    const auto fitted = data::fitToLength(clip.signal, target);
    const auto grid = dsp::stft(fitted, config.windowLen, config.hop);
    const auto spec = dsp::logMagnitudeSpectrogram(grid);

    nn::Sample<float> sample;
    sample.label = clip.label;
    sample.input = nn::Tensor<float>({1, spec.bins, spec.frames});

    if (config.normalizeSpectrograms) {
        double mean = 0.0;
        for (double v : spec.values) mean += v;
        mean /= static_cast<double>(spec.values.size());
        double var = 0.0;
        for (double v : spec.values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(spec.values.size());
        const double scale = 1.0 / std::sqrt(var + 1e-12);
        for (std::size_t i = 0; i < spec.values.size(); ++i)
            sample.input.data[i] = static_cast<float>((spec.values[i] - mean) * scale);
    } else {
        for (std::size_t i = 0; i < spec.values.size(); ++i)
            sample.input.data[i] = static_cast<float>(spec.values[i]);
    }
    return sample;
}

namespace {

std::vector<data::LabeledClip> loadDataset(const ExperimentConfig& config,
                                           std::vector<std::string>& classNames) {
    std::vector<data::LabeledClip> clips;
    if (config.synth) {
        const auto& s = *config.synth;
        if (s.perClass < 1) fail(ErrorCode::BadConfig, "synth.perClass must be >= 1");
        for (int i = 0; i < s.perClass; ++i) {
            const std::uint64_t clipSeed = deriveSeed(s.seed, static_cast<std::uint64_t>(i));
            for (int c = 0; c < data::kSynthClassCount; ++c)
                clips.push_back(data::synthClip(c, s.durationS, s.sampleRateHz, clipSeed));
        }
        classNames.clear();
        for (int c = 0; c < data::kSynthClassCount; ++c)
            classNames.emplace_back(data::synthClassName(c));
    } else {
        const auto manifest = data::loadManifest(*config.manifestRoot);
        classNames = manifest.classNames;
        clips = data::loadClips(manifest);
    }
    if (clips.empty()) fail(ErrorCode::EmptyDataset, "experiment: no clips loaded");
    return clips;
}

std::uint64_t hashAudio(const std::vector<data::LabeledClip>& clips) {
    // FNV-1a over the raw sample bytes, order-sensitive
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& clip : clips)
        for (double v : clip.signal.samples) {
            std::uint64_t bits;
            static_assert(sizeof bits == sizeof v);
            std::memcpy(&bits, &v, 8);
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xFF;
                h *= 1099511628211ULL;
            }
        }
    return h;
}

void appendCsvRow(std::ofstream& out, const MetricsRow& row) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%s,%.9g,%.9g\n", row.epoch,
                  row.isVal ? "val" : "train", row.loss, row.accuracy);
    out << buf;
    out.flush();
}

} // namespace

std::string metricsCsv(const std::vector<MetricsRow>& rows) {
    std::string out = "epoch,split,loss,accuracy\n";
    char buf[128];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%d,%s,%.9g,%.9g\n", row.epoch,
                      row.isVal ? "val" : "train", row.loss, row.accuracy);
        out += buf;
    }
    return out;
}

ExperimentResult runExperiment(const ExperimentConfig& config) {
    ExperimentResult result;

    auto clips = loadDataset(config, result.classNames);
    if (config.balanceCap)
        clips = data::balanceClasses(clips, *config.balanceCap, deriveSeed(config.runSeed, 10));

    auto [train, val] = data::splitTrainVal(clips, config.valFraction,
                                            deriveSeed(config.runSeed, 1));

    if (config.snrDb) {
        for (std::size_t i = 0; i < train.size(); ++i)
            train[i].signal = dsp::addAWGN(train[i].signal, *config.snrDb,
                                           deriveSeed(config.runSeed, 1000 + i));
    }
    result.trainAudioHash = hashAudio(train);
    result.valAudioHash = hashAudio(val);

    std::vector<nn::Sample<float>> trainSamples, valSamples;
    trainSamples.reserve(train.size());
    valSamples.reserve(val.size());
    for (const auto& clip : train) trainSamples.push_back(clipToSample(clip, config));
    for (const auto& clip : val) valSamples.push_back(clipToSample(clip, config));

    nn::ModelConfig modelCfg = config.model;
    modelCfg.numClasses = static_cast<int>(result.classNames.size());
    modelCfg.inputHeight = trainSamples.front().input.shape[1];
    modelCfg.inputWidth = trainSamples.front().input.shape[2];
    modelCfg.seed = deriveSeed(config.runSeed, 2);
    if (config.bank) {
        modelCfg.initBank1 = banks::generateBank(config.bank->kind, modelCfg.conv1Filters,
                                                 config.bank->alpha, config.bank->sigma,
                                                 config.bank->seed);
    }

    auto model = nn::buildModel<float>(modelCfg);
    nn::OptimizerState<float> opt(model, deriveSeed(config.runSeed, 3));

    std::ofstream csv;
    if (!config.metricsPath.empty()) {
        csv.open(config.metricsPath, std::ios::binary);
        if (!csv) fail(ErrorCode::IoError, "cannot write metrics: " + config.metricsPath);
        csv << "epoch,split,loss,accuracy\n";
        csv.flush();
    }

    for (int epoch = 1; epoch <= modelCfg.epochs; ++epoch) {
        const auto trainMetrics = nn::trainEpoch(model, trainSamples, opt);
        const auto valMetrics = nn::evaluate(model, valSamples);
        const MetricsRow trainRow{epoch, false, trainMetrics.loss, trainMetrics.accuracy};
        const MetricsRow valRow{epoch, true, valMetrics.loss, valMetrics.accuracy};
        result.rows.push_back(trainRow);
        result.rows.push_back(valRow);
        if (csv.is_open()) {
            appendCsvRow(csv, trainRow);
            appendCsvRow(csv, valRow);
        }
        result.finalVal = valMetrics;
    }

    if (!config.modelDir.empty()) saveModel(config.modelDir, model, result.classNames);
    return result;
}

namespace {

io::TnsTensor toTns(const nn::Tensor<float>& t) {
    io::TnsTensor out;
    for (std::size_t d : t.shape) out.dims.push_back(static_cast<std::uint32_t>(d));
    out.values = t.data;
    return out;
}

void fromTns(const io::TnsTensor& src, nn::Tensor<float>& dst, const std::string& name) {
    if (src.dims.size() != dst.shape.size())
        fail(ErrorCode::ShapeMismatch, "model load: rank mismatch for " + name);
    for (std::size_t i = 0; i < src.dims.size(); ++i)
        if (src.dims[i] != dst.shape[i])
            fail(ErrorCode::ShapeMismatch, "model load: dim mismatch for " + name);
    dst.data = src.values;
}

} // namespace

void saveModel(const std::string& dir, const nn::Model<float>& model,
               const std::vector<std::string>& classNames) {
    fs::create_directories(dir);
    const auto& cfg = model.config;

    json manifest;
    manifest["version"] = 1;
    manifest["architecture"] = {
        {"conv1Filters", cfg.conv1Filters},   {"conv2Filters", cfg.conv2Filters},
        {"denseUnits", cfg.denseUnits},       {"numClasses", cfg.numClasses},
        {"inputHeight", cfg.inputHeight},     {"inputWidth", cfg.inputWidth},
        {"frozenFirstLayer", cfg.frozenFirstLayer},
    };
    manifest["training"] = {
        {"learningRate", cfg.learningRate}, {"momentum", cfg.momentum},
        {"batchSize", cfg.batchSize},       {"epochs", cfg.epochs},
        {"seed", cfg.seed},
    };
    manifest["classNames"] = classNames;
    manifest["params"] = json::array({"conv1.kernels", "conv1.bias", "conv2.kernels",
                                      "conv2.bias", "dense1.weights", "dense1.bias",
                                      "dense2.weights", "dense2.bias"});

    std::ofstream mf(fs::path(dir) / "manifest.json", std::ios::binary);
    if (!mf) fail(ErrorCode::IoError, "cannot write model manifest in " + dir);
    mf << manifest.dump(2) << "\n";

    const auto put = [&dir](const std::string& name, const nn::Tensor<float>& t) {
        io::writeTns((fs::path(dir) / (name + ".tns")).string(), toTns(t));
    };
    put("conv1.kernels", model.conv1.kernels);
    put("conv1.bias", model.conv1.bias);
    put("conv2.kernels", model.conv2.kernels);
    put("conv2.bias", model.conv2.bias);
    put("dense1.weights", model.dense1.weights);
    put("dense1.bias", model.dense1.bias);
    put("dense2.weights", model.dense2.weights);
    put("dense2.bias", model.dense2.bias);
}

nn::Model<float> loadModel(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "manifest.json");
    if (!mf) fail(ErrorCode::IoError, "cannot open model manifest in " + dir);
    json manifest;
    try {
        mf >> manifest;
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("model manifest: ") + e.what());
    }

    nn::ModelConfig cfg;
    try {
        const auto& arch = manifest.at("architecture");
        cfg.conv1Filters = arch.at("conv1Filters").get<int>();
        cfg.conv2Filters = arch.at("conv2Filters").get<int>();
        cfg.denseUnits = arch.at("denseUnits").get<int>();
        cfg.numClasses = arch.at("numClasses").get<int>();
        cfg.inputHeight = arch.at("inputHeight").get<std::size_t>();
        cfg.inputWidth = arch.at("inputWidth").get<std::size_t>();
        cfg.frozenFirstLayer = arch.at("frozenFirstLayer").get<bool>();
        const auto& training = manifest.at("training");
        cfg.learningRate = training.at("learningRate").get<double>();
        cfg.momentum = training.at("momentum").get<double>();
        cfg.batchSize = training.at("batchSize").get<int>();
        cfg.epochs = training.at("epochs").get<int>();
        cfg.seed = training.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("model manifest: ") + e.what());
    }

    auto model = nn::buildModel<float>(cfg);
    const auto get = [&dir](const std::string& name, nn::Tensor<float>& t) {
        fromTns(io::readTns((fs::path(dir) / (name + ".tns")).string()), t, name);
    };
    get("conv1.kernels", model.conv1.kernels);
    get("conv1.bias", model.conv1.bias);
    get("conv2.kernels", model.conv2.kernels);
    get("conv2.bias", model.conv2.bias);
    get("dense1.weights", model.dense1.weights);
    get("dense1.bias", model.dense1.bias);
    get("dense2.weights", model.dense2.weights);
    get("dense2.bias", model.dense2.bias);
    nn::refreshTransposes(model);
    return model;
}

} // namespace topokern::experiment
