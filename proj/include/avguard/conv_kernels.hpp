// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>

#include "avguard/tensor.hpp"

namespace avguard {

// 3x3/pad-1 patch matrix for one sample: row (c*9 + kh*3 + kw) of a matrix
// whose rows are spaced `ld` apart; the sample's block starts at `col`.
template <typename S>
void im2col3(const S* x, int64_t cin, int64_t h, int64_t w, int sh, int sw,
             int ho, int wo, S* col, int64_t ld);

// Adjoint scatter: accumulates the patch-matrix gradient back into dx.
template <typename S>
void col2im3(const S* col, int64_t ld, int64_t cin, int64_t h, int64_t w,
             int sh, int sw, int ho, int wo, S* dx);

// Single-sample convolution: x (C,H,W), w (Cout,Cin,3,3), b (Cout),
// 3x3 kernel, padding 1, configurable stride.
template <typename S>
TensorT<S> conv2d_fwd(const TensorT<S>& x, const TensorT<S>& w,
                      const TensorT<S>& b, int sh = 1, int sw = 1);

// Gradients for the single-sample convolution. Accumulates into dw/db,
// overwrites dx. Pass dx == nullptr to skip input gradients.
template <typename S>
void conv2d_bwd(const TensorT<S>& x, const TensorT<S>& w, const TensorT<S>& dout,
                TensorT<S>* dx, TensorT<S>* dw, TensorT<S>* db, int sh = 1,
                int sw = 1);

}  // namespace avguard
