// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace smn::kernels {

// Dense double-precision products, row-major operands. Each output element
// is accumulated in a fixed sequential order by exactly one thread, so all
// results are bit-deterministic for any thread count.

/// C(M x N) = A(M x K) * B(K x N); accumulates into C when accumulate is set.
void gemm_nn(std::size_t M, std::size_t K, std::size_t N, const double* A, const double* B,
             double* C, bool accumulate);

/// C(M x K) = A(M x N) * B(K x N)^T, i.e. C[i][j] = dot(A.row(i), B.row(j)).
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B,
             double* C, bool accumulate);

/// C(K x N) = A(M x K)^T * B(M x N).
void gemm_tn(std::size_t M, std::size_t K, std::size_t N, const double* A, const double* B,
             double* C, bool accumulate);

/// out[i] = sum over columns of X.row(i); X is M x N. Accumulates when set.
void row_sum(std::size_t M, std::size_t N, const double* X, double* out, bool accumulate);

/// Deterministic parallel dot product (fixed chunk grid, sequential combine).
double par_dot(const double* a, const double* b, std::size_t n);

}  // namespace smn::kernels
