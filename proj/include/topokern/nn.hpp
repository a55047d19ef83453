#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "topokern/error.hpp"
#include "topokern/filter_bank.hpp"
#include "topokern/gemm.hpp"
#include "topokern/rng.hpp"
#include "topokern/tensor.hpp"

namespace topokern::nn {

// Two-conv-layer spectrogram classifier:
//   conv(3x3, n1) -> ReLU -> pool -> conv(3x3, n2) -> ReLU -> pool
//   -> flatten -> dense(denseUnits) -> ReLU -> dense(numClasses) -> softmax.
// Valid (no-padding) convolution throughout. Training arithmetic is the
// template parameter T: float for experiments, double for gradient checks.

template <typename T>
struct ConvLayer {
    Tensor<T> kernels; // [outC, inC, 3, 3]
    Tensor<T> bias;    // [outC]
    bool trainable = true;

    std::size_t outChannels() const { return kernels.shape[0]; }
    std::size_t inChannels() const { return kernels.shape[1]; }
};

template <typename T>
struct DenseLayer {
    Tensor<T> weights; // [out, in]
    Tensor<T> bias;    // [out]
};

struct ModelConfig {
    int conv1Filters = 64;
    int conv2Filters = 64;
    std::optional<banks::FilterBank> initBank1;
    std::optional<banks::FilterBank> initBank2;
    bool frozenFirstLayer = false;
    int denseUnits = 64;
    int numClasses = 6;
    double learningRate = 0.01;
    double momentum = 0.9;
    int batchSize = 32;
    int epochs = 15;
    std::uint64_t seed = 0;
    std::size_t inputHeight = 129; // STFT bins at the default window
    std::size_t inputWidth = 49;   // frames of a 0.4 s clip at the default hop

    void validate() const {
        if (conv1Filters < 1 || conv2Filters < 1 || denseUnits < 1 ||
            numClasses < 1 || batchSize < 1 || epochs < 0)
            fail(ErrorCode::BadConfig, "model config: counts must be positive");
        if (learningRate < 0.0 || momentum < 0.0 || momentum >= 1.0)
            fail(ErrorCode::BadConfig, "model config: bad optimizer constants");
    }
};

template <typename T>
struct Sample {
    Tensor<T> input; // [1, H, W]
    int label = 0;
};

struct Metrics {
    double loss = 0.0;
    double accuracy = 0.0;
};

// ---------------------------------------------------------------------------
// Elementary ops
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void im2col3x3(const Tensor<T>& input, T* cols) {
    const std::size_t c = input.shape[0], h = input.shape[1], w = input.shape[2];
    const std::size_t oh = h - 2, ow = w - 2;
    // row (ci*9 + dy*3 + dx), column (y*ow + x) <- input[ci, y+dy, x+dx]
    T* out = cols;
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t dy = 0; dy < 3; ++dy)
            for (std::size_t dx = 0; dx < 3; ++dx)
                for (std::size_t y = 0; y < oh; ++y) {
                    const T* src = &input.data[(ci * h + y + dy) * w + dx];
                    for (std::size_t x = 0; x < ow; ++x) *out++ = src[x];
                }
}

template <typename T>
void col2imAccum3x3(const T* cols, Tensor<T>& dInput) {
    const std::size_t c = dInput.shape[0], h = dInput.shape[1], w = dInput.shape[2];
    const std::size_t oh = h - 2, ow = w - 2;
    const T* in = cols;
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t dy = 0; dy < 3; ++dy)
            for (std::size_t dx = 0; dx < 3; ++dx)
                for (std::size_t y = 0; y < oh; ++y) {
                    T* dst = &dInput.data[(ci * h + y + dy) * w + dx];
                    for (std::size_t x = 0; x < ow; ++x) dst[x] += in[x];
                    in += ow;
                }
}

} // namespace detail

/// Valid 3x3 cross-correlation plus bias. input [C,H,W] -> [C',H-2,W-2].
template <typename T>
Tensor<T> conv2dForward(const Tensor<T>& input, const ConvLayer<T>& layer) {
    if (input.shape.size() != 3)
        fail(ErrorCode::ShapeMismatch, "conv2dForward: input must be [C,H,W]");
    const std::size_t c = input.shape[0], h = input.shape[1], w = input.shape[2];
    if (c != layer.inChannels())
        fail(ErrorCode::ShapeMismatch, "conv2dForward: channel mismatch");
    if (h < 3 || w < 3)
        fail(ErrorCode::ShapeMismatch, "conv2dForward: spatial dims must be >= 3");

    const std::size_t oc = layer.outChannels(), oh = h - 2, ow = w - 2;
    std::vector<T> cols(c * 9 * oh * ow);
    detail::im2col3x3(input, cols.data());

    Tensor<T> out({oc, oh, ow});
    gemmNN(layer.kernels.ptr(), cols.data(), out.ptr(), oc, c * 9, oh * ow, false);
    for (std::size_t o = 0; o < oc; ++o) {
        T* row = &out.data[o * oh * ow];
        const T b = layer.bias.data[o];
        for (std::size_t i = 0; i < oh * ow; ++i) row[i] += b;
    }
    return out;
}

/// Elementwise max(0, x).
template <typename T>
Tensor<T> reluForward(const Tensor<T>& t) {
    Tensor<T> out = t;
    for (T& v : out.data) v = v > T(0) ? v : T(0);
    return out;
}

/// Disjoint 2x2 max pooling, trailing odd row/column dropped.
template <typename T>
Tensor<T> maxPool2x2(const Tensor<T>& t) {
    if (t.shape.size() != 3)
        fail(ErrorCode::ShapeMismatch, "maxPool2x2: input must be [C,H,W]");
    const std::size_t c = t.shape[0], h = t.shape[1], w = t.shape[2];
    if (h < 2 || w < 2)
        fail(ErrorCode::ShapeMismatch, "maxPool2x2: spatial dims must be >= 2");
    Tensor<T> out({c, h / 2, w / 2});
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t y = 0; y + 1 < h; y += 2)
            for (std::size_t x = 0; x + 1 < w; x += 2) {
                const T a = t.at3(ci, y, x), b = t.at3(ci, y, x + 1);
                const T d = t.at3(ci, y + 1, x), e = t.at3(ci, y + 1, x + 1);
                out.at3(ci, y / 2, x / 2) = std::max(std::max(a, b), std::max(d, e));
            }
    return out;
}

/// W x + b.
template <typename T>
Tensor<T> denseForward(const Tensor<T>& t, const Tensor<T>& weights,
                       const Tensor<T>& bias) {
    if (t.size() != weights.shape[1] || weights.shape[0] != bias.size())
        fail(ErrorCode::ShapeMismatch, "denseForward: shape mismatch");
    Tensor<T> out({weights.shape[0]});
    gemv(weights.ptr(), t.ptr(), out.ptr(), weights.shape[0], weights.shape[1], false);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bias.data[i];
    return out;
}

/// Max-subtracted softmax; loss = -log p[label], grad = p - onehot(label).
template <typename T>
std::pair<double, Tensor<T>> softmaxCrossEntropy(const Tensor<T>& logits, int label) {
    const std::size_t k = logits.size();
    if (label < 0 || static_cast<std::size_t>(label) >= k)
        fail(ErrorCode::BadLabel, "softmaxCrossEntropy: label out of range");

    double maxLogit = -HUGE_VAL;
    for (std::size_t i = 0; i < k; ++i)
        maxLogit = std::max(maxLogit, static_cast<double>(logits.data[i]));
    double denom = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        denom += std::exp(static_cast<double>(logits.data[i]) - maxLogit);

    Tensor<T> grad({k});
    for (std::size_t i = 0; i < k; ++i) {
        const double p = std::exp(static_cast<double>(logits.data[i]) - maxLogit) / denom;
        grad.data[i] = static_cast<T>(p - (static_cast<std::size_t>(label) == i ? 1.0 : 0.0));
    }
    const double pLabel =
        std::exp(static_cast<double>(logits.data[static_cast<std::size_t>(label)]) - maxLogit) / denom;
    return {-std::log(pLabel), grad};
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

template <typename T>
struct Gradients {
    Tensor<T> conv1K, conv1B, conv2K, conv2B;
    Tensor<T> dense1W, dense1B, dense2W, dense2B;
};

template <typename T>
struct Model {
    ModelConfig config;
    ConvLayer<T> conv1, conv2;
    DenseLayer<T> dense1, dense2;

    // derived shapes
    std::size_t c1H = 0, c1W = 0, p1H = 0, p1W = 0;
    std::size_t c2H = 0, c2W = 0, p2H = 0, p2W = 0;
    std::size_t flatLen = 0;

    struct Workspace {
        std::vector<T> col1, col2, conv2KernelsT;
        Tensor<T> act1, pool1, act2, pool2, hidden, logits;
        std::vector<std::uint32_t> argmax1, argmax2;
        Tensor<T> dAct1, dAct2, dPool1, dHidden, dFlat;
        std::vector<T> dCol2;
        std::vector<T> dOutT1, dOutT2, dKT1, dKT2; // transposed scratch
    };
    mutable Workspace ws;

    Gradients<T> makeGradients() const {
        Gradients<T> g;
        g.conv1K = Tensor<T>(conv1.kernels.shape);
        g.conv1B = Tensor<T>(conv1.bias.shape);
        g.conv2K = Tensor<T>(conv2.kernels.shape);
        g.conv2B = Tensor<T>(conv2.bias.shape);
        g.dense1W = Tensor<T>(dense1.weights.shape);
        g.dense1B = Tensor<T>(dense1.bias.shape);
        g.dense2W = Tensor<T>(dense2.weights.shape);
        g.dense2B = Tensor<T>(dense2.bias.shape);
        return g;
    }

    /// (parameter, gradient, participates-in-updates) triplets, fixed order.
    template <typename Fn>
    void forEachParam(Gradients<T>& g, Fn&& fn) {
        fn(conv1.kernels, g.conv1K, conv1.trainable);
        fn(conv1.bias, g.conv1B, conv1.trainable);
        fn(conv2.kernels, g.conv2K, conv2.trainable);
        fn(conv2.bias, g.conv2B, conv2.trainable);
        fn(dense1.weights, g.dense1W, true);
        fn(dense1.bias, g.dense1B, true);
        fn(dense2.weights, g.dense2W, true);
        fn(dense2.bias, g.dense2B, true);
    }
};

namespace detail {

template <typename T>
void convForwardInto(const Tensor<T>& input, const ConvLayer<T>& layer, T* cols,
                     Tensor<T>& out) {
    const std::size_t c = input.shape[0], h = input.shape[1], w = input.shape[2];
    const std::size_t oc = layer.outChannels(), oh = h - 2, ow = w - 2;
    im2col3x3(input, cols);
    gemmNN(layer.kernels.ptr(), cols, out.ptr(), oc, c * 9, oh * ow, false);
    for (std::size_t o = 0; o < oc; ++o) {
        T* row = &out.data[o * oh * ow];
        const T b = layer.bias.data[o];
        for (std::size_t i = 0; i < oh * ow; ++i) row[i] += b;
    }
}

template <typename T>
void reluInPlace(Tensor<T>& t) {
    for (T& v : t.data) v = v > T(0) ? v : T(0);
}

template <typename T>
void maxPoolInto(const Tensor<T>& t, Tensor<T>& out, std::vector<std::uint32_t>& argmax) {
    const std::size_t c = t.shape[0], h = t.shape[1], w = t.shape[2];
    const std::size_t oh = h / 2, ow = w / 2;
    argmax.resize(c * oh * ow);
    std::size_t idx = 0;
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t y = 0; y + 1 < h; y += 2)
            for (std::size_t x = 0; x + 1 < w; x += 2) {
                std::size_t best = (ci * h + y) * w + x;
                T bestVal = t.data[best];
                const std::size_t candidates[3] = {(ci * h + y) * w + x + 1,
                                                   (ci * h + y + 1) * w + x,
                                                   (ci * h + y + 1) * w + x + 1};
                for (std::size_t cand : candidates)
                    if (t.data[cand] > bestVal) {
                        best = cand;
                        bestVal = t.data[cand];
                    }
                out.data[idx] = bestVal;
                argmax[idx] = static_cast<std::uint32_t>(best);
                ++idx;
            }
}

} // namespace detail

/// Forward pass caching activations in the model workspace; returns logits.
template <typename T>
const Tensor<T>& forwardCached(Model<T>& model, const Tensor<T>& input) {
    auto& ws = model.ws;
    if (input.shape.size() != 3 || input.shape[0] != model.conv1.inChannels() ||
        input.shape[1] != model.config.inputHeight ||
        input.shape[2] != model.config.inputWidth)
        fail(ErrorCode::ShapeMismatch, "forward: input shape does not match model");

    detail::convForwardInto(input, model.conv1, ws.col1.data(), ws.act1);
    detail::reluInPlace(ws.act1);
    detail::maxPoolInto(ws.act1, ws.pool1, ws.argmax1);

    detail::convForwardInto(ws.pool1, model.conv2, ws.col2.data(), ws.act2);
    detail::reluInPlace(ws.act2);
    detail::maxPoolInto(ws.act2, ws.pool2, ws.argmax2);

    // pool2 doubles as the flattened feature vector
    gemv(model.dense1.weights.ptr(), ws.pool2.ptr(), ws.hidden.ptr(),
         model.dense1.weights.shape[0], model.flatLen, false);
    for (std::size_t i = 0; i < ws.hidden.size(); ++i)
        ws.hidden.data[i] += model.dense1.bias.data[i];
    detail::reluInPlace(ws.hidden);

    gemv(model.dense2.weights.ptr(), ws.hidden.ptr(), ws.logits.ptr(),
         model.dense2.weights.shape[0], ws.hidden.size(), false);
    for (std::size_t i = 0; i < ws.logits.size(); ++i)
        ws.logits.data[i] += model.dense2.bias.data[i];
    return ws.logits;
}

/// Reverse-mode pass for one sample; accumulates raw (unaveraged) gradients.
/// forwardCached must have run for this sample.
template <typename T>
void backwardCached(Model<T>& model, const Tensor<T>& dLogits, Gradients<T>& g) {
    auto& ws = model.ws;
    const std::size_t hiddenN = ws.hidden.size();
    const std::size_t classes = ws.logits.size();

    // dense2
    for (std::size_t i = 0; i < classes; ++i) {
        const T gi = dLogits.data[i];
        g.dense2B.data[i] += gi;
        T* wRow = &g.dense2W.data[i * hiddenN];
        const T* h = ws.hidden.ptr();
        for (std::size_t j = 0; j < hiddenN; ++j) wRow[j] += gi * h[j];
    }
    ws.dHidden.fill(T(0));
    gemvTransposedAccum(model.dense2.weights.ptr(), dLogits.ptr(), ws.dHidden.ptr(),
                        classes, hiddenN);
    for (std::size_t i = 0; i < hiddenN; ++i)
        if (!(ws.hidden.data[i] > T(0))) ws.dHidden.data[i] = T(0);

    // dense1
    for (std::size_t i = 0; i < hiddenN; ++i) {
        const T gi = ws.dHidden.data[i];
        g.dense1B.data[i] += gi;
        T* wRow = &g.dense1W.data[i * model.flatLen];
        const T* x = ws.pool2.ptr();
        for (std::size_t j = 0; j < model.flatLen; ++j) wRow[j] += gi * x[j];
    }
    ws.dFlat.fill(T(0));
    gemvTransposedAccum(model.dense1.weights.ptr(), ws.dHidden.ptr(), ws.dFlat.ptr(),
                        hiddenN, model.flatLen);

    // unpool 2 -> relu mask -> conv2 gradients
    ws.dAct2.fill(T(0));
    for (std::size_t i = 0; i < ws.argmax2.size(); ++i)
        ws.dAct2.data[ws.argmax2[i]] += ws.dFlat.data[i];
    for (std::size_t i = 0; i < ws.dAct2.size(); ++i)
        if (!(ws.act2.data[i] > T(0))) ws.dAct2.data[i] = T(0);

    // dK2 += dAct2 * col2^T, computed as (col2 * dAct2^T)^T so the hot GEMM
    // contracts over contiguous rows.
    const std::size_t n2 = model.c2H * model.c2W;
    const std::size_t k2 = model.conv2.inChannels() * 9;
    const std::size_t oc2 = model.conv2.outChannels();
    transposeInto(ws.dAct2.ptr(), ws.dOutT2.data(), oc2, n2);
    gemmNN(ws.col2.data(), ws.dOutT2.data(), ws.dKT2.data(), k2, n2, oc2, false);
    transposeAccum(ws.dKT2.data(), g.conv2K.ptr(), k2, oc2);
    for (std::size_t o = 0; o < oc2; ++o) {
        T sum = T(0);
        const T* row = &ws.dAct2.data[o * n2];
        for (std::size_t i = 0; i < n2; ++i) sum += row[i];
        g.conv2B.data[o] += sum;
    }

    // Everything below conv2 only feeds conv1's parameter gradients, so a
    // frozen first layer ends the pass here.
    if (model.conv1.trainable) {
        gemmNN(ws.conv2KernelsT.data(), ws.dAct2.ptr(), ws.dCol2.data(), k2, oc2, n2, false);
        ws.dPool1.fill(T(0));
        detail::col2imAccum3x3(ws.dCol2.data(), ws.dPool1);

        ws.dAct1.fill(T(0));
        for (std::size_t i = 0; i < ws.argmax1.size(); ++i)
            ws.dAct1.data[ws.argmax1[i]] += ws.dPool1.data[i];
        for (std::size_t i = 0; i < ws.dAct1.size(); ++i)
            if (!(ws.act1.data[i] > T(0))) ws.dAct1.data[i] = T(0);

        const std::size_t n1 = model.c1H * model.c1W;
        const std::size_t k1 = model.conv1.inChannels() * 9;
        const std::size_t oc1 = model.conv1.outChannels();
        transposeInto(ws.dAct1.ptr(), ws.dOutT1.data(), oc1, n1);
        gemmNN(ws.col1.data(), ws.dOutT1.data(), ws.dKT1.data(), k1, n1, oc1, false);
        transposeAccum(ws.dKT1.data(), g.conv1K.ptr(), k1, oc1);
        for (std::size_t o = 0; o < oc1; ++o) {
            T sum = T(0);
            const T* row = &ws.dAct1.data[o * n1];
            for (std::size_t i = 0; i < n1; ++i) sum += row[i];
            g.conv1B.data[o] += sum;
        }
    }
}

/// Refreshes workspace transposes after parameter updates.
template <typename T>
void refreshTransposes(Model<T>& model) {
    const std::size_t oc2 = model.conv2.outChannels();
    const std::size_t k2 = model.conv2.inChannels() * 9;
    model.ws.conv2KernelsT.resize(oc2 * k2);
    for (std::size_t o = 0; o < oc2; ++o)
        for (std::size_t k = 0; k < k2; ++k)
            model.ws.conv2KernelsT[k * oc2 + o] = model.conv2.kernels.data[o * k2 + k];
}

template <typename T>
Model<T> buildModel(const ModelConfig& cfg) {
    cfg.validate();
    Model<T> model;
    model.config = cfg;

    const std::size_t h = cfg.inputHeight, w = cfg.inputWidth;
    if (h < 3 || w < 3) fail(ErrorCode::ShapeMismatch, "buildModel: input too small");
    model.c1H = h - 2;
    model.c1W = w - 2;
    model.p1H = model.c1H / 2;
    model.p1W = model.c1W / 2;
    if (model.p1H < 3 || model.p1W < 3)
        fail(ErrorCode::ShapeMismatch, "buildModel: input too small after first pool");
    model.c2H = model.p1H - 2;
    model.c2W = model.p1W - 2;
    model.p2H = model.c2H / 2;
    model.p2W = model.c2W / 2;
    if (model.p2H < 1 || model.p2W < 1)
        fail(ErrorCode::ShapeMismatch, "buildModel: input too small after second pool");

    const std::size_t n1 = static_cast<std::size_t>(cfg.conv1Filters);
    const std::size_t n2 = static_cast<std::size_t>(cfg.conv2Filters);
    model.flatLen = n2 * model.p2H * model.p2W;

    model.conv1.kernels = Tensor<T>({n1, 1, 3, 3});
    model.conv1.bias = Tensor<T>({n1});
    model.conv1.trainable = !cfg.frozenFirstLayer;
    model.conv2.kernels = Tensor<T>({n2, n1, 3, 3});
    model.conv2.bias = Tensor<T>({n2});
    model.dense1.weights = Tensor<T>({static_cast<std::size_t>(cfg.denseUnits), model.flatLen});
    model.dense1.bias = Tensor<T>({static_cast<std::size_t>(cfg.denseUnits)});
    model.dense2.weights =
        Tensor<T>({static_cast<std::size_t>(cfg.numClasses), static_cast<std::size_t>(cfg.denseUnits)});
    model.dense2.bias = Tensor<T>({static_cast<std::size_t>(cfg.numClasses)});

    // conv1: bank kernel on channel 0 (single-channel input) or He random
    if (cfg.initBank1) {
        if (cfg.initBank1->kernels.size() < n1)
            fail(ErrorCode::BankTooSmall, "buildModel: bank1 smaller than conv1Filters");
        for (std::size_t o = 0; o < n1; ++o)
            for (std::size_t i = 0; i < 9; ++i)
                model.conv1.kernels.data[o * 9 + i] =
                    static_cast<T>(cfg.initBank1->kernels[o].flat()[i]);
    } else {
        GaussianSampler g(deriveSeed(cfg.seed, 11));
        const double scale = std::sqrt(2.0 / 9.0);
        for (T& v : model.conv1.kernels.data) v = static_cast<T>(scale * g.next());
    }

    // conv2: bank kernel on one seeded-random input channel, else He random
    if (cfg.initBank2) {
        if (cfg.initBank2->kernels.size() < n2)
            fail(ErrorCode::BankTooSmall, "buildModel: bank2 smaller than conv2Filters");
        Xoshiro256StarStar channelPick(deriveSeed(cfg.seed, 12));
        for (std::size_t o = 0; o < n2; ++o) {
            const std::size_t ch = static_cast<std::size_t>(channelPick.below(n1));
            for (std::size_t i = 0; i < 9; ++i)
                model.conv2.kernels.data[(o * n1 + ch) * 9 + i] =
                    static_cast<T>(cfg.initBank2->kernels[o].flat()[i]);
        }
    } else {
        GaussianSampler g(deriveSeed(cfg.seed, 12));
        const double scale = std::sqrt(2.0 / (static_cast<double>(n1) * 9.0));
        for (T& v : model.conv2.kernels.data) v = static_cast<T>(scale * g.next());
    }

    {
        GaussianSampler g(deriveSeed(cfg.seed, 13));
        const double s1 = std::sqrt(2.0 / static_cast<double>(model.flatLen));
        for (T& v : model.dense1.weights.data) v = static_cast<T>(s1 * g.next());
        const double s2 = std::sqrt(2.0 / static_cast<double>(cfg.denseUnits));
        for (T& v : model.dense2.weights.data) v = static_cast<T>(s2 * g.next());
    }

    // workspace
    auto& ws = model.ws;
    ws.col1.resize(9 * model.c1H * model.c1W);
    ws.col2.resize(n1 * 9 * model.c2H * model.c2W);
    ws.act1 = Tensor<T>({n1, model.c1H, model.c1W});
    ws.pool1 = Tensor<T>({n1, model.p1H, model.p1W});
    ws.act2 = Tensor<T>({n2, model.c2H, model.c2W});
    ws.pool2 = Tensor<T>({n2, model.p2H, model.p2W});
    ws.hidden = Tensor<T>({static_cast<std::size_t>(cfg.denseUnits)});
    ws.logits = Tensor<T>({static_cast<std::size_t>(cfg.numClasses)});
    ws.dAct1 = Tensor<T>({n1, model.c1H, model.c1W});
    ws.dAct2 = Tensor<T>({n2, model.c2H, model.c2W});
    ws.dPool1 = Tensor<T>({n1, model.p1H, model.p1W});
    ws.dHidden = Tensor<T>({static_cast<std::size_t>(cfg.denseUnits)});
    ws.dFlat = Tensor<T>({model.flatLen});
    ws.dCol2.resize(n1 * 9 * model.c2H * model.c2W);
    ws.dOutT1.resize(n1 * model.c1H * model.c1W);
    ws.dOutT2.resize(n2 * model.c2H * model.c2W);
    ws.dKT1.resize(9 * n1);
    ws.dKT2.resize(n1 * 9 * n2);
    refreshTransposes(model);
    return model;
}

/// Mean loss over a batch; no state change beyond the scratch workspace.
template <typename T>
double lossOnBatch(Model<T>& model, const std::vector<Sample<T>>& batch) {
    if (batch.empty()) fail(ErrorCode::EmptyDataset, "lossOnBatch: empty batch");
    double total = 0.0;
    for (const auto& sample : batch) {
        const auto& logits = forwardCached(model, sample.input);
        total += softmaxCrossEntropy(logits, sample.label).first;
    }
    return total / static_cast<double>(batch.size());
}

/// Mean-loss gradients for every trainable parameter (exact reverse mode).
template <typename T>
Gradients<T> backwardOnBatch(Model<T>& model, const std::vector<Sample<T>>& batch) {
    if (batch.empty()) fail(ErrorCode::EmptyDataset, "backwardOnBatch: empty batch");
    refreshTransposes(model);
    Gradients<T> g = model.makeGradients();
    for (const auto& sample : batch) {
        forwardCached(model, sample.input);
        auto [loss, dLogits] = softmaxCrossEntropy(model.ws.logits, sample.label);
        (void)loss;
        backwardCached(model, dLogits, g);
    }
    const T inv = T(1) / static_cast<T>(batch.size());
    model.forEachParam(g, [inv](Tensor<T>&, Tensor<T>& grad, bool) {
        for (T& v : grad.data) v *= inv;
    });
    return g;
}

template <typename T>
struct OptimizerState {
    Gradients<T> velocity;
    Xoshiro256StarStar shuffleRng;
    double learningRate;
    double momentum;
    int batchSize;

    OptimizerState(const Model<T>& model, std::uint64_t shuffleSeed)
        : velocity(model.makeGradients()),
          shuffleRng(shuffleSeed),
          learningRate(model.config.learningRate),
          momentum(model.config.momentum),
          batchSize(model.config.batchSize) {}
};

/// One pass of shuffled mini-batch SGD with momentum. Returns the epoch's
/// ride-along train metrics (loss/accuracy measured as batches are visited).
template <typename T>
Metrics trainEpoch(Model<T>& model, const std::vector<Sample<T>>& dataset,
                   OptimizerState<T>& opt) {
    if (dataset.empty()) fail(ErrorCode::EmptyDataset, "trainEpoch: empty dataset");

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffleSeeded(order, opt.shuffleRng);

    double lossSum = 0.0;
    std::size_t correct = 0;
    Gradients<T> g = model.makeGradients();

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(opt.batchSize)) {
        const std::size_t end =
            std::min(order.size(), start + static_cast<std::size_t>(opt.batchSize));
        const std::size_t batchN = end - start;

        model.forEachParam(g, [](Tensor<T>&, Tensor<T>& grad, bool) { grad.fill(T(0)); });
        refreshTransposes(model);

        for (std::size_t i = start; i < end; ++i) {
            const auto& sample = dataset[order[i]];
            const auto& logits = forwardCached(model, sample.input);

            std::size_t argmax = 0;
            for (std::size_t j = 1; j < logits.size(); ++j)
                if (logits.data[j] > logits.data[argmax]) argmax = j;
            if (argmax == static_cast<std::size_t>(sample.label)) ++correct;

            auto [loss, dLogits] = softmaxCrossEntropy(logits, sample.label);
            lossSum += loss;
            backwardCached(model, dLogits, g);
        }

        const T inv = T(1) / static_cast<T>(batchN);
        const T lr = static_cast<T>(opt.learningRate);
        const T mu = static_cast<T>(opt.momentum);
        auto* vel = &opt.velocity;
        model.forEachParam(g, [&](Tensor<T>& param, Tensor<T>& grad, bool trainable) {
            if (!trainable) return;
            Tensor<T>* v = nullptr;
            if (&param == &model.conv1.kernels) v = &vel->conv1K;
            else if (&param == &model.conv1.bias) v = &vel->conv1B;
            else if (&param == &model.conv2.kernels) v = &vel->conv2K;
            else if (&param == &model.conv2.bias) v = &vel->conv2B;
            else if (&param == &model.dense1.weights) v = &vel->dense1W;
            else if (&param == &model.dense1.bias) v = &vel->dense1B;
            else if (&param == &model.dense2.weights) v = &vel->dense2W;
            else v = &vel->dense2B;
            for (std::size_t i = 0; i < param.size(); ++i) {
                v->data[i] = mu * v->data[i] - lr * grad.data[i] * inv;
                param.data[i] += v->data[i];
            }
        });
    }
    refreshTransposes(model);
    return {lossSum / static_cast<double>(dataset.size()),
            static_cast<double>(correct) / static_cast<double>(dataset.size())};
}

/// Forward-only metrics; parameters untouched.
template <typename T>
Metrics evaluate(Model<T>& model, const std::vector<Sample<T>>& dataset) {
    if (dataset.empty()) fail(ErrorCode::EmptyDataset, "evaluate: empty dataset");
    double lossSum = 0.0;
    std::size_t correct = 0;
    for (const auto& sample : dataset) {
        const auto& logits = forwardCached(model, sample.input);
        lossSum += softmaxCrossEntropy(logits, sample.label).first;
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < logits.size(); ++j)
            if (logits.data[j] > logits.data[argmax]) argmax = j;
        if (argmax == static_cast<std::size_t>(sample.label)) ++correct;
    }
    return {lossSum / static_cast<double>(dataset.size()),
            static_cast<double>(correct) / static_cast<double>(dataset.size())};
}

} // namespace topokern::nn
