// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

namespace avguard {

// Row-major C = alpha * op(A) * op(B) + beta * C, backed by BLAS.
// op(A) is m x k, op(B) is k x n, C is m x n.
template <typename S>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, S alpha, const S* a,
          const S* b, S beta, S* c);

// Same with explicit leading dimensions, for operating on sub-blocks.
template <typename S>
void gemm_ld(bool trans_a, bool trans_b, int m, int n, int k, S alpha,
             const S* a, int lda, const S* b, int ldb, S beta, S* c, int ldc);

}  // namespace avguard
