// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/gemm.hpp"

#include <cblas.h>

extern "C" void openblas_set_num_threads(int);

namespace avguard {

namespace {
// We parallelize across samples/frames ourselves; keep BLAS single-threaded
// so results and thread use stay deterministic.
struct BlasInit {
  BlasInit() { openblas_set_num_threads(1); }
};
const BlasInit g_blas_init;
}  // namespace

template <>
void gemm<double>(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
                  const double* a, const double* b, double beta, double* c) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a,
              trans_a ? m : k, b, trans_b ? k : n, beta, c, n);
}

template <>
void gemm<float>(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
                 const float* a, const float* b, float beta, float* c) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a,
              trans_a ? m : k, b, trans_b ? k : n, beta, c, n);
}

template <>
void gemm_ld<double>(bool trans_a, bool trans_b, int m, int n, int k,
                     double alpha, const double* a, int lda, const double* b,
                     int ldb, double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b,
              ldb, beta, c, ldc);
}

template <>
void gemm_ld<float>(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
                    const float* a, int lda, const float* b, int ldb, float beta,
                    float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b,
              ldb, beta, c, ldc);
}

}  // namespace avguard
