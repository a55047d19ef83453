#pragma once

#include <algorithm>
#include <cstddef>

namespace topokern::nn {

// Register-tiled matrix kernels for the convolution/dense hot paths.
// All matrices are dense row-major. Deterministic: the reduction order is
// fixed by the tile layout coded here, so results reproduce bit-for-bit on
// a given build.

namespace detail {

inline constexpr std::size_t kLanes = 8;

template <int MR, int NR, typename T>
void gemmTile(const T* __restrict a, const T* __restrict b, T* __restrict c,
              std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
    const std::size_t mFull = m - m % MR;
    const std::size_t nFull = n - n % NR;

    for (std::size_t i0 = 0; i0 < mFull; i0 += MR) {
        for (std::size_t j0 = 0; j0 < nFull; j0 += NR) {
            T acc[MR][NR] = {};
            for (std::size_t p = 0; p < k; ++p) {
                const T* bRow = b + p * n + j0;
                for (int i = 0; i < MR; ++i) {
                    const T av = a[(i0 + i) * k + p];
                    for (int j = 0; j < NR; ++j) acc[i][j] += av * bRow[j];
                }
            }
            for (int i = 0; i < MR; ++i) {
                T* cRow = c + (i0 + i) * n + j0;
                if (accumulate)
                    for (int j = 0; j < NR; ++j) cRow[j] += acc[i][j];
                else
                    for (int j = 0; j < NR; ++j) cRow[j] = acc[i][j];
            }
        }
        for (std::size_t j = nFull; j < n; ++j) {
            for (std::size_t i = i0; i < i0 + MR; ++i) {
                T sum = accumulate ? c[i * n + j] : T(0);
                for (std::size_t p = 0; p < k; ++p) sum += a[i * k + p] * b[p * n + j];
                c[i * n + j] = sum;
            }
        }
    }
    for (std::size_t i = mFull; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T sum = accumulate ? c[i * n + j] : T(0);
            for (std::size_t p = 0; p < k; ++p) sum += a[i * k + p] * b[p * n + j];
            c[i * n + j] = sum;
        }
    }
}

} // namespace detail

/// C[M,N] = A[M,K] * B[K,N] (+ C when accumulate).
/// Wide column tiles win except when the A tile rows outgrow L1 (long K),
/// where the narrow variant avoids thrashing.
template <typename T>
void gemmNN(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
            std::size_t n, bool accumulate) {
    constexpr int wide = static_cast<int>(128 / sizeof(T));
    constexpr int narrow = wide / 2;
    if (k * sizeof(T) * 8 <= 24 * 1024)
        detail::gemmTile<8, wide>(a, b, c, m, k, n, accumulate);
    else
        detail::gemmTile<8, narrow>(a, b, c, m, k, n, accumulate);
}

/// B[N,M] = A[M,N]^T.
template <typename T>
void transposeInto(const T* a, T* b, std::size_t m, std::size_t n) {
    constexpr std::size_t kBlock = 32;
    for (std::size_t i0 = 0; i0 < m; i0 += kBlock)
        for (std::size_t j0 = 0; j0 < n; j0 += kBlock) {
            const std::size_t iEnd = std::min(m, i0 + kBlock);
            const std::size_t jEnd = std::min(n, j0 + kBlock);
            for (std::size_t i = i0; i < iEnd; ++i)
                for (std::size_t j = j0; j < jEnd; ++j) b[j * m + i] = a[i * n + j];
        }
}

/// C[N,M] += A[M,N]^T (accumulating transpose).
template <typename T>
void transposeAccum(const T* a, T* c, std::size_t m, std::size_t n) {
    constexpr std::size_t kBlock = 32;
    for (std::size_t i0 = 0; i0 < m; i0 += kBlock)
        for (std::size_t j0 = 0; j0 < n; j0 += kBlock) {
            const std::size_t iEnd = std::min(m, i0 + kBlock);
            const std::size_t jEnd = std::min(n, j0 + kBlock);
            for (std::size_t i = i0; i < iEnd; ++i)
                for (std::size_t j = j0; j < jEnd; ++j) c[j * m + i] += a[i * n + j];
        }
}

/// y[M] = W[M,N] * x[N] (+ y when accumulate). Lane-partial accumulators
/// keep the reduction order fixed while still vectorizing.
template <typename T>
void gemv(const T* w, const T* x, T* y, std::size_t m, std::size_t n,
          bool accumulate) {
    using detail::kLanes;
    for (std::size_t i = 0; i < m; ++i) {
        const T* row = w + i * n;
        T lanes[kLanes] = {};
        const std::size_t nFull = n - n % kLanes;
        for (std::size_t p = 0; p < nFull; p += kLanes)
            for (std::size_t l = 0; l < kLanes; ++l) lanes[l] += row[p + l] * x[p + l];
        T sum = T(0);
        for (std::size_t l = 0; l < kLanes; ++l) sum += lanes[l];
        for (std::size_t p = nFull; p < n; ++p) sum += row[p] * x[p];
        y[i] = accumulate ? y[i] + sum : sum;
    }
}

/// y[N] += W[M,N]^T * g[M]  (axpy per row; W walked once).
template <typename T>
void gemvTransposedAccum(const T* w, const T* g, T* y, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const T gi = g[i];
        const T* row = w + i * n;
        for (std::size_t j = 0; j < n; ++j) y[j] += gi * row[j];
    }
}

} // namespace topokern::nn
