#include <doctest.h>

#include <cmath>

#include "topokern/error.hpp"
#include "topokern/nn.hpp"

using namespace topokern;
using namespace topokern::nn;

namespace {

// Direct (loop) cross-correlation oracle, independent of the im2col path.
template <typename T>
Tensor<T> convOracle(const Tensor<T>& input, const ConvLayer<T>& layer) {
    const std::size_t c = input.shape[0], h = input.shape[1], w = input.shape[2];
    const std::size_t oc = layer.outChannels();
    Tensor<T> out({oc, h - 2, w - 2});
    for (std::size_t o = 0; o < oc; ++o)
        for (std::size_t y = 0; y + 2 < h; ++y)
            for (std::size_t x = 0; x + 2 < w; ++x) {
                T sum = layer.bias.data[o];
                for (std::size_t ci = 0; ci < c; ++ci)
                    for (std::size_t dy = 0; dy < 3; ++dy)
                        for (std::size_t dx = 0; dx < 3; ++dx)
                            sum += layer.kernels.data[((o * c + ci) * 3 + dy) * 3 + dx] *
                                   input.at3(ci, y + dy, x + dx);
                out.at3(o, y, x) = sum;
            }
    return out;
}

ModelConfig microConfig() {
    ModelConfig cfg;
    cfg.conv1Filters = 4;
    cfg.conv2Filters = 4;
    cfg.denseUnits = 8;
    cfg.numClasses = 2;
    cfg.inputHeight = 12;
    cfg.inputWidth = 12;
    cfg.batchSize = 8;
    cfg.seed = 2718;
    return cfg;
}

template <typename T>
std::vector<Sample<T>> randomBatch(std::size_t n, const ModelConfig& cfg,
                                   std::uint64_t seed) {
    GaussianSampler g(seed);
    Xoshiro256StarStar labels(seed + 1);
    std::vector<Sample<T>> batch(n);
    for (auto& s : batch) {
        s.input = Tensor<T>({1, cfg.inputHeight, cfg.inputWidth});
        for (T& v : s.input.data) v = static_cast<T>(g.next());
        s.label = static_cast<int>(labels.below(static_cast<std::uint64_t>(cfg.numClasses)));
    }
    return batch;
}

} // namespace

TEST_CASE("conv2dForward named cases") {
    // all-zero input -> bias everywhere
    ConvLayer<double> layer;
    layer.kernels = Tensor<double>({2, 1, 3, 3});
    layer.bias = Tensor<double>({2});
    GaussianSampler g(4);
    for (double& v : layer.kernels.data) v = g.next();
    layer.bias.data = {0.3, -1.2};

    Tensor<double> zeros({1, 6, 5});
    const auto biasOnly = conv2dForward(zeros, layer);
    for (std::size_t o = 0; o < 2; ++o)
        for (std::size_t i = 0; i < 4 * 3; ++i)
            CHECK(biasOnly.data[o * 12 + i] == layer.bias.data[o]);

    // ones kernel, centered impulse -> 3x3 plateau of ones
    ConvLayer<double> ones;
    ones.kernels = Tensor<double>({1, 1, 3, 3});
    ones.bias = Tensor<double>({1});
    ones.kernels.fill(1.0);
    Tensor<double> impulse({1, 5, 5});
    impulse.at3(0, 2, 2) = 1.0;
    const auto plateau = conv2dForward(impulse, ones);
    for (double v : plateau.data) CHECK(v == 1.0);

    // zero-total-sum kernel kills constant input (response = bias)
    ConvLayer<double> stripe;
    stripe.kernels = Tensor<double>({1, 1, 3, 3});
    stripe.bias = Tensor<double>({1});
    const double s6 = 1.0 / std::sqrt(6.0);
    stripe.kernels.data = {s6, 0, -s6, s6, 0, -s6, s6, 0, -s6};
    stripe.bias.data = {0.25};
    Tensor<double> constant({1, 7, 7});
    constant.fill(3.7);
    const auto flat = conv2dForward(constant, stripe);
    for (double v : flat.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(conv2dForward(Tensor<double>({2, 6, 6}), layer), Error);
}

TEST_CASE("conv2dForward equals the direct correlation oracle") {
    GaussianSampler g(77);
    ConvLayer<double> layer;
    layer.kernels = Tensor<double>({5, 3, 3, 3});
    layer.bias = Tensor<double>({5});
    for (double& v : layer.kernels.data) v = g.next();
    for (double& v : layer.bias.data) v = g.next();

    Tensor<double> input({3, 9, 11});
    for (double& v : input.data) v = g.next();

    const auto fast = conv2dForward(input, layer);
    const auto slow = convOracle(input, layer);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(fast.data[i] == doctest::Approx(slow.data[i]).epsilon(1e-12));
}

TEST_CASE("reluForward") {
    Tensor<double> t({3});
    t.data = {-1.0, 0.0, 2.0};
    const auto r = reluForward(t);
    CHECK(r.data == std::vector<double>{0.0, 0.0, 2.0});
    const auto rr = reluForward(r);
    CHECK(rr.data == r.data);

    Tensor<double> neg({4});
    neg.data = {-5, -4, -0.1, -1e9};
    for (double v : reluForward(neg).data) CHECK(v == 0.0);
}

TEST_CASE("maxPool2x2 named cases") {
    Tensor<double> t({1, 2, 2});
    t.data = {1, 2, 3, 4};
    CHECK(maxPool2x2(t).data == std::vector<double>{4});

    Tensor<double> c({2, 4, 4});
    c.fill(0.5);
    const auto pooled = maxPool2x2(c);
    CHECK(pooled.shape == std::vector<std::size_t>{2, 2, 2});
    for (double v : pooled.data) CHECK(v == 0.5);

    Tensor<double> odd({1, 5, 5});
    for (std::size_t i = 0; i < odd.size(); ++i) odd.data[i] = static_cast<double>(i);
    const auto p = maxPool2x2(odd);
    CHECK(p.shape == std::vector<std::size_t>{1, 2, 2});
    CHECK(p.data == std::vector<double>{6, 8, 16, 18});
}

TEST_CASE("denseForward named cases and oracle") {
    Tensor<double> x({3});
    x.data = {1.0, -2.0, 0.5};

    Tensor<double> identity({3, 3});
    identity.data = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    Tensor<double> zeroBias({3});
    CHECK(denseForward(x, identity, zeroBias).data == x.data);

    Tensor<double> zeroW({2, 3});
    Tensor<double> bias({2});
    bias.data = {0.7, -0.1};
    CHECK(denseForward(x, zeroW, bias).data == bias.data);

    GaussianSampler g(6);
    Tensor<double> w({4, 3});
    Tensor<double> b({4});
    for (double& v : w.data) v = g.next();
    for (double& v : b.data) v = g.next();
    const auto y = denseForward(x, w, b);
    for (std::size_t i = 0; i < 4; ++i) {
        double expect = b.data[i];
        for (std::size_t j = 0; j < 3; ++j) expect += w.data[i * 3 + j] * x.data[j];
        CHECK(y.data[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("softmaxCrossEntropy: uniform, overflow, finite differences") {
    Tensor<double> uniform({4});
    uniform.fill(1.3);
    const auto [lossU, gradU] = softmaxCrossEntropy(uniform, 2);
    CHECK(lossU == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(gradU.data[i] == doctest::Approx(0.25 - (i == 2 ? 1.0 : 0.0)).epsilon(1e-12));

    Tensor<double> extreme({2});
    extreme.data = {1000.0, 0.0};
    const auto [lossE, gradE] = softmaxCrossEntropy(extreme, 0);
    CHECK(std::isfinite(lossE));
    CHECK(lossE == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(gradE.data[0]) <= 1e-12);

    GaussianSampler g(17);
    Tensor<double> logits({5});
    for (double& v : logits.data) v = g.next();
    const auto [loss, grad] = softmaxCrossEntropy(logits, 3);
    (void)loss;
    const double h = 1e-6;
    for (std::size_t i = 0; i < 5; ++i) {
        Tensor<double> up = logits, down = logits;
        up.data[i] += h;
        down.data[i] -= h;
        const double fd = (softmaxCrossEntropy(up, 3).first -
                           softmaxCrossEntropy(down, 3).first) / (2.0 * h);
        CHECK(grad.data[i] == doctest::Approx(fd).epsilon(1e-6));
    }

    CHECK_THROWS_AS(softmaxCrossEntropy(logits, 5), Error);
    CHECK_THROWS_AS(softmaxCrossEntropy(logits, -1), Error);
}

TEST_CASE("backward matches central finite differences on the micro model") {
    const auto cfg = microConfig();
    auto model = buildModel<double>(cfg);
    const auto batch = randomBatch<double>(8, cfg, 555);

    auto grads = backwardOnBatch(model, batch);

    const double h = 1e-4;
    double worstRel = 0.0;
    model.forEachParam(grads, [&](Tensor<double>& param, Tensor<double>& grad, bool) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double keep = param.data[i];
            param.data[i] = keep + h;
            refreshTransposes(model);
            const double up = lossOnBatch(model, batch);
            param.data[i] = keep - h;
            refreshTransposes(model);
            const double down = lossOnBatch(model, batch);
            param.data[i] = keep;
            refreshTransposes(model);
            const double fd = (up - down) / (2.0 * h);
            const double bp = grad.data[i];
            const double rel = std::abs(bp - fd) / std::max({std::abs(bp), std::abs(fd), 1e-6});
            worstRel = std::max(worstRel, rel);
        }
    });
    CHECK(worstRel <= 1e-5);
}

TEST_CASE("gradients vanish in the confident-correct limit") {
    const auto cfg = microConfig();
    auto model = buildModel<double>(cfg);
    // huge margin head: zero weights, bias strongly preferring class 0
    model.dense2.weights.fill(0.0);
    model.dense2.bias.data = {50.0, -50.0};

    auto batch = randomBatch<double>(4, cfg, 31);
    for (auto& s : batch) s.label = 0;
    CHECK(lossOnBatch(model, batch) <= 1e-8);

    auto grads = backwardOnBatch(model, batch);
    model.forEachParam(grads, [&](Tensor<double>&, Tensor<double>& grad, bool) {
        for (double v : grad.data) CHECK(std::abs(v) <= 1e-12);
    });
}

TEST_CASE("duplicating the batch leaves mean gradients unchanged") {
    const auto cfg = microConfig();
    auto model = buildModel<double>(cfg);
    const auto batch = randomBatch<double>(5, cfg, 99);

    std::vector<Sample<double>> doubled;
    for (const auto& s : batch) {
        doubled.push_back(s);
        doubled.push_back(s);
    }

    auto g1 = backwardOnBatch(model, batch);
    auto g2 = backwardOnBatch(model, doubled);
    const Tensor<double>* firsts[8] = {&g1.conv1K, &g1.conv1B, &g1.conv2K, &g1.conv2B,
                                       &g1.dense1W, &g1.dense1B, &g1.dense2W, &g1.dense2B};
    const Tensor<double>* seconds[8] = {&g2.conv1K, &g2.conv1B, &g2.conv2K, &g2.conv2B,
                                        &g2.dense1W, &g2.dense1B, &g2.dense2W, &g2.dense2B};
    for (int t = 0; t < 8; ++t)
        for (std::size_t i = 0; i < firsts[t]->size(); ++i)
            CHECK(firsts[t]->data[i] ==
                  doctest::Approx(seconds[t]->data[i]).epsilon(1e-12));
}

TEST_CASE("buildModel: bank initialization, frozen contract, bank too small") {
    auto cfg = microConfig();
    cfg.initBank1 = banks::generateBank(banks::BankKind::OF, 4, 1.0, 0.5, 42);
    cfg.frozenFirstLayer = true;
    auto model = buildModel<float>(cfg);

    // layer-1 kernels bitwise equal the bank (as float)
    for (std::size_t o = 0; o < 4; ++o)
        for (std::size_t i = 0; i < 9; ++i)
            CHECK(model.conv1.kernels.data[o * 9 + i] ==
                  static_cast<float>(cfg.initBank1->kernels[o].flat()[i]));

    const auto before = model.conv1.kernels.data;
    auto batch = randomBatch<float>(16, cfg, 1);
    OptimizerState<float> opt(model, 5);
    trainEpoch(model, batch, opt);
    CHECK(model.conv1.kernels.data == before); // bitwise frozen
    CHECK(model.dense2.weights.data != buildModel<float>(cfg).dense2.weights.data);

    // trainable variant: kernels equal the bank at epoch 0, differ after
    auto cfgTrainable = cfg;
    cfgTrainable.frozenFirstLayer = false;
    auto trainable = buildModel<float>(cfgTrainable);
    CHECK(trainable.conv1.kernels.data == before);
    OptimizerState<float> opt2(trainable, 5);
    trainEpoch(trainable, batch, opt2);
    CHECK(trainable.conv1.kernels.data != before);

    auto tooSmall = cfg;
    tooSmall.conv1Filters = 8; // bank only has 4
    CHECK_THROWS_AS(buildModel<float>(tooSmall), Error);
}

TEST_CASE("buildModel: layer-2 bank lands on exactly one channel per filter") {
    auto cfg = microConfig();
    cfg.initBank2 = banks::generateBank(banks::BankKind::CF, 4, 1.0, 0.0, 9);
    auto model = buildModel<float>(cfg);
    for (std::size_t o = 0; o < 4; ++o) {
        int nonZeroChannels = 0;
        for (std::size_t c = 0; c < 4; ++c) {
            bool any = false;
            for (std::size_t i = 0; i < 9; ++i)
                if (model.conv2.kernels.data[(o * 4 + c) * 9 + i] != 0.0f) any = true;
            if (any) ++nonZeroChannels;
        }
        CHECK(nonZeroChannels == 1);
    }
}

TEST_CASE("default-shape forward pass is finite on a 65x31 spectrogram") {
    ModelConfig cfg;
    cfg.inputHeight = 65;
    cfg.inputWidth = 31;
    cfg.seed = 7;
    auto model = buildModel<float>(cfg);
    Sample<float> s;
    s.input = Tensor<float>({1, 65, 31});
    GaussianSampler g(2);
    for (auto& v : s.input.data) v = static_cast<float>(g.next());
    const auto& logits = forwardCached(model, s.input);
    CHECK(logits.size() == static_cast<std::size_t>(cfg.numClasses));
    CHECK(logits.allFinite());
}

TEST_CASE("shape algebra: flatten length over 20 random shapes") {
    Xoshiro256StarStar rng(12);
    for (int i = 0; i < 20; ++i) {
        const std::size_t h = 12 + rng.below(40);
        const std::size_t w = 12 + rng.below(40);
        ModelConfig cfg = microConfig();
        cfg.inputHeight = h;
        cfg.inputWidth = w;
        auto model = buildModel<float>(cfg);
        const std::size_t expected = static_cast<std::size_t>(cfg.conv2Filters) *
                                     (((h - 2) / 2 - 2) / 2) * (((w - 2) / 2 - 2) / 2);
        CHECK(model.flatLen == expected);
    }
}

TEST_CASE("trainEpoch: zero lr is a no-op; single-sample overfits; deterministic") {
    auto cfg = microConfig();
    cfg.learningRate = 0.0;
    auto frozen = buildModel<float>(cfg);
    const auto batch = randomBatch<float>(6, cfg, 8);
    const auto before = frozen.dense1.weights.data;
    OptimizerState<float> opt(frozen, 3);
    const auto metrics = trainEpoch(frozen, batch, opt);
    CHECK(frozen.dense1.weights.data == before);
    CHECK(std::isfinite(metrics.loss));

    // overfit one sample
    auto cfg2 = microConfig();
    cfg2.learningRate = 0.02;
    cfg2.batchSize = 1;
    auto model = buildModel<float>(cfg2);
    const auto one = randomBatch<float>(1, cfg2, 77);
    OptimizerState<float> opt2(model, 4);
    std::vector<double> losses;
    for (int step = 0; step < 200; ++step) losses.push_back(trainEpoch(model, one, opt2).loss);
    bool monotoneAfter10 = true;
    for (std::size_t i = 11; i < losses.size(); ++i)
        if (losses[i] > losses[i - 1] + 1e-12) monotoneAfter10 = false;
    CHECK((monotoneAfter10 || losses.back() < 1e-3));

    // determinism: identical seeds from identical initial state
    auto m1 = buildModel<float>(cfg);
    auto m2 = buildModel<float>(cfg);
    OptimizerState<float> o1(m1, 9), o2(m2, 9);
    for (int e = 0; e < 2; ++e) {
        const auto r1 = trainEpoch(m1, batch, o1);
        const auto r2 = trainEpoch(m2, batch, o2);
        CHECK(r1.loss == r2.loss);
        CHECK(r1.accuracy == r2.accuracy);
    }
    CHECK(m1.dense1.weights.data == m2.dense1.weights.data);

    CHECK_THROWS_AS(trainEpoch(m1, {}, o1), Error);
}

TEST_CASE("evaluate: perfect and uniform models, repeatability") {
    auto cfg = microConfig();
    auto model = buildModel<float>(cfg);
    auto batch = randomBatch<float>(10, cfg, 21);

    // confident head: always predicts class 0
    model.dense2.weights.fill(0.0f);
    model.dense2.bias.data = {30.0f, -30.0f};
    for (auto& s : batch) s.label = 0;
    const auto perfect = evaluate(model, batch);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.loss <= 1e-8);

    // uniform logits on balanced labels: argmax ties resolve to class 0
    model.dense2.bias.data = {0.0f, 0.0f};
    int index = 0;
    for (auto& s : batch) s.label = (index++ % 2);
    const auto uniform = evaluate(model, batch);
    CHECK(uniform.accuracy == doctest::Approx(0.5).epsilon(1e-12));

    const auto again = evaluate(model, batch);
    CHECK(again.loss == uniform.loss);
    CHECK(again.accuracy == uniform.accuracy);

    CHECK_THROWS_AS(evaluate(model, {}), Error);
}

TEST_CASE("OF bank kernels give pure-bias response to constant inputs") {
    const auto bank = banks::generateBank(banks::BankKind::OF, 8, 1.0, 0.5, 42);
    ConvLayer<float> layer;
    layer.kernels = Tensor<float>({8, 1, 3, 3});
    layer.bias = Tensor<float>({8});
    for (std::size_t o = 0; o < 8; ++o) {
        for (std::size_t i = 0; i < 9; ++i)
            layer.kernels.data[o * 9 + i] = static_cast<float>(bank.kernels[o].flat()[i]);
        layer.bias.data[o] = 0.1f * static_cast<float>(o);
    }
    Tensor<float> constant({1, 8, 8});
    constant.fill(2.5f);
    const auto out = conv2dForward(constant, layer);
    const std::size_t perChannel = out.size() / 8;
    for (std::size_t o = 0; o < 8; ++o)
        for (std::size_t i = 0; i < perChannel; ++i)
            CHECK(std::abs(out.data[o * perChannel + i] - layer.bias.data[o]) <= 1e-5f);
}
