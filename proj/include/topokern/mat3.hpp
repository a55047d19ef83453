#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace topokern {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](std::size_t i) { return (&x)[i]; }
    double operator[](std::size_t i) const { return (&x)[i]; }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double squaredNorm() const { return dot(*this); }
    double norm() const { return std::sqrt(squaredNorm()); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// 3x3 real matrix, row-major storage. m[3*row + col].
struct Mat3 {
    std::array<double, 9> m{};

    static Mat3 identity() {
        return Mat3{{1, 0, 0, 0, 1, 0, 0, 0, 1}};
    }
    static Mat3 zero() { return {}; }

    double& operator()(std::size_t row, std::size_t col) { return m[3 * row + col]; }
    double operator()(std::size_t row, std::size_t col) const { return m[3 * row + col]; }

    Vec3 col(std::size_t j) const { return {m[j], m[3 + j], m[6 + j]}; }
    Vec3 row(std::size_t i) const { return {m[3 * i], m[3 * i + 1], m[3 * i + 2]}; }
    void setCol(std::size_t j, const Vec3& v) {
        m[j] = v.x;
        m[3 + j] = v.y;
        m[6 + j] = v.z;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (std::size_t i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (std::size_t i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat3 operator-() const {
        Mat3 r;
        for (std::size_t i = 0; i < 9; ++i) r.m[i] = -m[i];
        return r;
    }
    Mat3 operator*(double s) const {
        Mat3 r;
        for (std::size_t i = 0; i < 9; ++i) r.m[i] = m[i] * s;
        return r;
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                double sum = 0.0;
                for (std::size_t k = 0; k < 3; ++k) sum += (*this)(i, k) * o(k, j);
                r(i, j) = sum;
            }
        return r;
    }
    Vec3 operator*(const Vec3& v) const {
        return {row(0).dot(v), row(1).dot(v), row(2).dot(v)};
    }

    Mat3 transposed() const {
        Mat3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) -
               m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    double frobeniusNorm() const {
        double sum = 0.0;
        for (double v : m) sum += v * v;
        return std::sqrt(sum);
    }

    double maxAbsDiff(const Mat3& o) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < 9; ++i)
            worst = std::max(worst, std::abs(m[i] - o.m[i]));
        return worst;
    }

    bool allFinite() const {
        for (double v : m)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline Mat3 operator*(double s, const Mat3& a) { return a * s; }

/// Outer product a * b^T.
inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

} // namespace topokern
