#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "topokern/error.hpp"

namespace topokern::nn {

/// Dense n-dimensional array, row-major flat storage.
template <typename T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(count(shape), T(0));
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) {
            if (d == 0) fail(ErrorCode::ShapeMismatch, "tensor dimension must be positive");
            n *= d;
        }
        return n;
    }

    std::size_t size() const { return data.size(); }
    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    T& operator[](std::size_t i) { return data[i]; }
    const T& operator[](std::size_t i) const { return data[i]; }

    // [C,H,W] accessor
    T& at3(std::size_t c, std::size_t h, std::size_t w) {
        return data[(c * shape[1] + h) * shape[2] + w];
    }
    T at3(std::size_t c, std::size_t h, std::size_t w) const {
        return data[(c * shape[1] + h) * shape[2] + w];
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool allFinite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

} // namespace topokern::nn
