// SPDX-License-Identifier: Apache-2.0
#include "core/kernels.hpp"

#include <algorithm>
#include <array>
#include <vector>

#if defined(__AVX512F__) || defined(__AVX2__)
#include <immintrin.h>
#endif

#include "core/threading.hpp"

namespace smn::kernels {
namespace {

constexpr std::size_t kPanel = 512;  // column-panel width (C block stays in L1)
constexpr std::size_t kTile = 8;     // register tile width

// C rows [i0,i0+4) over columns [j0,j1) accumulate A[i][k] * B[k][j].
// B rows stream contiguously (prefetch-friendly); the C block stays in L1.
inline void micro_4row(std::size_t K, std::size_t N, const double* __restrict A,
                       const double* __restrict B, double* __restrict C, std::size_t i0,
                       std::size_t j0, std::size_t j1) {
    double* __restrict c0 = C + (i0 + 0) * N;
    double* __restrict c1 = C + (i0 + 1) * N;
    double* __restrict c2 = C + (i0 + 2) * N;
    double* __restrict c3 = C + (i0 + 3) * N;
    for (std::size_t k = 0; k < K; ++k) {
        const double a0 = A[(i0 + 0) * K + k];
        const double a1 = A[(i0 + 1) * K + k];
        const double a2 = A[(i0 + 2) * K + k];
        const double a3 = A[(i0 + 3) * K + k];
        const double* __restrict b = B + k * N;
        for (std::size_t j = j0; j < j1; ++j) {
            const double bj = b[j];
            c0[j] += a0 * bj;
            c1[j] += a1 * bj;
            c2[j] += a2 * bj;
            c3[j] += a3 * bj;
        }
    }
}

inline void micro_1row(std::size_t K, std::size_t N, const double* __restrict A,
                       const double* __restrict B, double* __restrict C, std::size_t i,
                       std::size_t j0, std::size_t j1) {
    double* __restrict c = C + i * N;
    for (std::size_t k = 0; k < K; ++k) {
        const double a = A[i * K + k];
        const double* __restrict b = B + k * N;
        for (std::size_t j = j0; j < j1; ++j) c[j] += a * b[j];
    }
}

}  // namespace

void gemm_nn(std::size_t M, std::size_t K, std::size_t N, const double* A, const double* B,
             double* C, bool accumulate) {
    const std::size_t panels = (N + kPanel - 1) / kPanel;
    if (panels == 1) {
        // narrow output: parallelize over row blocks instead of column panels
        const std::size_t row_blocks = (M + 3) / 4;
        parallel_for(
            0, row_blocks,
            [&](std::size_t b0, std::size_t b1) {
                for (std::size_t b = b0; b < b1; ++b) {
                    const std::size_t i0 = b * 4;
                    const std::size_t i1 = std::min(M, i0 + 4);
                    if (!accumulate) {
                        for (std::size_t i = i0; i < i1; ++i) std::fill(C + i * N, C + (i + 1) * N, 0.0);
                    }
                    if (i1 - i0 == 4) {
                        micro_4row(K, N, A, B, C, i0, 0, N);
                    } else {
                        for (std::size_t i = i0; i < i1; ++i) micro_1row(K, N, A, B, C, i, 0, N);
                    }
                }
            },
            1);
        return;
    }
    parallel_for(
        0, panels,
        [&](std::size_t p0, std::size_t p1) {
            for (std::size_t p = p0; p < p1; ++p) {
                const std::size_t j0 = p * kPanel;
                const std::size_t j1 = std::min(N, j0 + kPanel);
                if (!accumulate) {
                    for (std::size_t i = 0; i < M; ++i) {
                        std::fill(C + i * N + j0, C + i * N + j1, 0.0);
                    }
                }
                std::size_t i = 0;
                for (; i + 4 <= M; i += 4) micro_4row(K, N, A, B, C, i, j0, j1);
                for (; i < M; ++i) micro_1row(K, N, A, B, C, i, j0, j1);
            }
        },
        1);
}

namespace {

// Fixed-order lane reduction: lane l sums indices congruent to l mod 16, so
// the arithmetic order is defined by construction and vectorizes cleanly.
inline double lane_dot(const double* __restrict a, const double* __restrict b, std::size_t n) {
    double acc[16] = {};
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        for (std::size_t l = 0; l < 16; ++l) acc[l] += a[i + l] * b[i + l];
    }
    double t0 = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    double t1 = ((acc[8] + acc[9]) + (acc[10] + acc[11])) +
                ((acc[12] + acc[13]) + (acc[14] + acc[15]));
    double total = t0 + t1;
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

inline double lane_sum(const double* __restrict a, std::size_t n) {
    double acc[16] = {};
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        for (std::size_t l = 0; l < 16; ++l) acc[l] += a[i + l];
    }
    double t0 = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    double t1 = ((acc[8] + acc[9]) + (acc[10] + acc[11])) +
                ((acc[12] + acc[13]) + (acc[14] + acc[15]));
    double total = t0 + t1;
    for (; i < n; ++i) total += a[i];
    return total;
}

}  // namespace

namespace {

// 4x4 block of row dots: out[ii][jj] = dot(A.row(i0+ii), B.row(j0+jj)).
// Registers hold all 16 accumulators so each B element is loaded once per
// four A rows instead of once per row.
void nt_dot_4x4(const double* a0, const double* a1, const double* a2, const double* a3,
                const double* b0, const double* b1, const double* b2, const double* b3,
                std::size_t n, double out[4][4]) {
#if defined(__AVX512F__)
    __m512d acc[4][4];
    for (auto& row : acc) {
        for (auto& v : row) v = _mm512_setzero_pd();
    }
    const double* a[4] = {a0, a1, a2, a3};
    const double* b[4] = {b0, b1, b2, b3};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m512d bv0 = _mm512_loadu_pd(b[0] + i);
        const __m512d bv1 = _mm512_loadu_pd(b[1] + i);
        const __m512d bv2 = _mm512_loadu_pd(b[2] + i);
        const __m512d bv3 = _mm512_loadu_pd(b[3] + i);
        for (int ii = 0; ii < 4; ++ii) {
            const __m512d av = _mm512_loadu_pd(a[ii] + i);
            acc[ii][0] = _mm512_fmadd_pd(av, bv0, acc[ii][0]);
            acc[ii][1] = _mm512_fmadd_pd(av, bv1, acc[ii][1]);
            acc[ii][2] = _mm512_fmadd_pd(av, bv2, acc[ii][2]);
            acc[ii][3] = _mm512_fmadd_pd(av, bv3, acc[ii][3]);
        }
    }
    for (int ii = 0; ii < 4; ++ii) {
        for (int jj = 0; jj < 4; ++jj) out[ii][jj] = _mm512_reduce_add_pd(acc[ii][jj]);
    }
    for (; i < n; ++i) {
        for (int ii = 0; ii < 4; ++ii) {
            for (int jj = 0; jj < 4; ++jj) out[ii][jj] += a[ii][i] * b[jj][i];
        }
    }
#elif defined(__AVX2__)
    // two 2x4 halves keep the accumulator count within 16 ymm registers
    const double* a[4] = {a0, a1, a2, a3};
    const double* b[4] = {b0, b1, b2, b3};
    for (int half = 0; half < 2; ++half) {
        __m256d acc[2][4];
        for (auto& row : acc) {
            for (auto& v : row) v = _mm256_setzero_pd();
        }
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
            const __m256d bv0 = _mm256_loadu_pd(b[0] + i);
            const __m256d bv1 = _mm256_loadu_pd(b[1] + i);
            const __m256d bv2 = _mm256_loadu_pd(b[2] + i);
            const __m256d bv3 = _mm256_loadu_pd(b[3] + i);
            for (int ii = 0; ii < 2; ++ii) {
                const __m256d av = _mm256_loadu_pd(a[2 * half + ii] + i);
                acc[ii][0] = _mm256_fmadd_pd(av, bv0, acc[ii][0]);
                acc[ii][1] = _mm256_fmadd_pd(av, bv1, acc[ii][1]);
                acc[ii][2] = _mm256_fmadd_pd(av, bv2, acc[ii][2]);
                acc[ii][3] = _mm256_fmadd_pd(av, bv3, acc[ii][3]);
            }
        }
        for (int ii = 0; ii < 2; ++ii) {
            for (int jj = 0; jj < 4; ++jj) {
                alignas(32) double lanes[4];
                _mm256_store_pd(lanes, acc[ii][jj]);
                double t = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
                for (std::size_t r = i; r < n; ++r) t += a[2 * half + ii][r] * b[jj][r];
                out[2 * half + ii][jj] = t;
            }
        }
    }
#else
    const double* a[4] = {a0, a1, a2, a3};
    const double* b[4] = {b0, b1, b2, b3};
    for (int ii = 0; ii < 4; ++ii) {
        for (int jj = 0; jj < 4; ++jj) out[ii][jj] = lane_dot(a[ii], b[jj], n);
    }
#endif
}

}  // namespace

void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B,
             double* C, bool accumulate) {
    const std::size_t row_blocks = (M + 3) / 4;
    parallel_for(
        0, row_blocks,
        [&](std::size_t b0, std::size_t b1) {
            for (std::size_t blk = b0; blk < b1; ++blk) {
                const std::size_t i0 = blk * 4;
                const std::size_t i1 = std::min(M, i0 + 4);
                std::size_t j = 0;
                if (i1 - i0 == 4) {
                    for (; j + 4 <= K; j += 4) {
                        double out[4][4];
                        nt_dot_4x4(A + (i0 + 0) * N, A + (i0 + 1) * N, A + (i0 + 2) * N,
                                   A + (i0 + 3) * N, B + (j + 0) * N, B + (j + 1) * N,
                                   B + (j + 2) * N, B + (j + 3) * N, N, out);
                        for (int ii = 0; ii < 4; ++ii) {
                            for (int jj = 0; jj < 4; ++jj) {
                                double& dst = C[(i0 + ii) * K + j + jj];
                                dst = accumulate ? dst + out[ii][jj] : out[ii][jj];
                            }
                        }
                    }
                }
                for (std::size_t i = i0; i < i1; ++i) {
                    for (std::size_t jr = (i1 - i0 == 4) ? j : 0; jr < K; ++jr) {
                        const double acc = lane_dot(A + i * N, B + jr * N, N);
                        double& dst = C[i * K + jr];
                        dst = accumulate ? dst + acc : acc;
                    }
                }
            }
        },
        1);
}

void gemm_tn(std::size_t M, std::size_t K, std::size_t N, const double* A, const double* B,
             double* C, bool accumulate) {
    // C[k][j] = sum_m A[m][k] * B[m][j]; panel over columns of C.
    const std::size_t panels = (N + kPanel - 1) / kPanel;
    parallel_for(
        0, panels,
        [&](std::size_t p0, std::size_t p1) {
            for (std::size_t p = p0; p < p1; ++p) {
                const std::size_t j0 = p * kPanel;
                const std::size_t j1 = std::min(N, j0 + kPanel);
                if (!accumulate) {
                    for (std::size_t k = 0; k < K; ++k) {
                        std::fill(C + k * N + j0, C + k * N + j1, 0.0);
                    }
                }
                std::size_t k = 0;
                for (; k + 4 <= K; k += 4) {
                    double* __restrict c0 = C + (k + 0) * N;
                    double* __restrict c1 = C + (k + 1) * N;
                    double* __restrict c2 = C + (k + 2) * N;
                    double* __restrict c3 = C + (k + 3) * N;
                    std::size_t j = j0;
                    for (; j + kTile <= j1; j += kTile) {
                        double acc0[kTile], acc1[kTile], acc2[kTile], acc3[kTile];
                        for (std::size_t l = 0; l < kTile; ++l) {
                            acc0[l] = c0[j + l];
                            acc1[l] = c1[j + l];
                            acc2[l] = c2[j + l];
                            acc3[l] = c3[j + l];
                        }
                        for (std::size_t m = 0; m < M; ++m) {
                            const double a0 = A[m * K + k + 0];
                            const double a1 = A[m * K + k + 1];
                            const double a2 = A[m * K + k + 2];
                            const double a3 = A[m * K + k + 3];
                            const double* __restrict b = B + m * N + j;
                            for (std::size_t l = 0; l < kTile; ++l) {
                                const double bl = b[l];
                                acc0[l] += a0 * bl;
                                acc1[l] += a1 * bl;
                                acc2[l] += a2 * bl;
                                acc3[l] += a3 * bl;
                            }
                        }
                        for (std::size_t l = 0; l < kTile; ++l) {
                            c0[j + l] = acc0[l];
                            c1[j + l] = acc1[l];
                            c2[j + l] = acc2[l];
                            c3[j + l] = acc3[l];
                        }
                    }
                    for (; j < j1; ++j) {
                        double s0 = c0[j], s1 = c1[j], s2 = c2[j], s3 = c3[j];
                        for (std::size_t m = 0; m < M; ++m) {
                            const double bj = B[m * N + j];
                            s0 += A[m * K + k + 0] * bj;
                            s1 += A[m * K + k + 1] * bj;
                            s2 += A[m * K + k + 2] * bj;
                            s3 += A[m * K + k + 3] * bj;
                        }
                        c0[j] = s0;
                        c1[j] = s1;
                        c2[j] = s2;
                        c3[j] = s3;
                    }
                }
                for (; k < K; ++k) {
                    double* __restrict c = C + k * N;
                    for (std::size_t m = 0; m < M; ++m) {
                        const double a = A[m * K + k];
                        const double* __restrict b = B + m * N;
                        for (std::size_t j = j0; j < j1; ++j) c[j] += a * b[j];
                    }
                }
            }
        },
        1);
}

void row_sum(std::size_t M, std::size_t N, const double* X, double* out, bool accumulate) {
    parallel_for(
        0, M,
        [&](std::size_t i0, std::size_t i1) {
            for (std::size_t i = i0; i < i1; ++i) {
                const double acc = lane_sum(X + i * N, N);
                if (accumulate) {
                    out[i] += acc;
                } else {
                    out[i] = acc;
                }
            }
        },
        4);
}

double par_dot(const double* a, const double* b, std::size_t n) {
    // Fixed chunk grid independent of thread count, combined sequentially.
    constexpr std::size_t kChunks = 64;
    const std::size_t chunk = (n + kChunks - 1) / kChunks;
    std::array<double, kChunks> partial{};
    parallel_for(
        0, kChunks,
        [&](std::size_t c0, std::size_t c1) {
            for (std::size_t c = c0; c < c1; ++c) {
                const std::size_t lo = c * chunk;
                const std::size_t hi = std::min(n, lo + chunk);
                partial[c] = (lo < hi) ? lane_dot(a + lo, b + lo, hi - lo) : 0.0;
            }
        },
        8);
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace smn::kernels
