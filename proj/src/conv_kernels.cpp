// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/conv_kernels.hpp"

#include <vector>

#include "avguard/errors.hpp"
#include "avguard/gemm.hpp"

namespace avguard {

template <typename S>
void im2col3(const S* x, int64_t cin, int64_t h, int64_t w, int sh, int sw,
             int ho, int wo, S* col, int64_t ld) {
  for (int64_t c = 0; c < cin; ++c) {
    for (int kh = 0; kh < 3; ++kh) {
      for (int kw = 0; kw < 3; ++kw) {
        S* row = col + ((c * 9) + kh * 3 + kw) * ld;
        int64_t idx = 0;
        for (int i = 0; i < ho; ++i) {
          int64_t src_h = static_cast<int64_t>(i) * sh + kh - 1;
          if (src_h < 0 || src_h >= h) {
            for (int j = 0; j < wo; ++j) row[idx++] = S(0);
            continue;
          }
          const S* src = x + (c * h + src_h) * w;
          for (int j = 0; j < wo; ++j) {
            int64_t src_w = static_cast<int64_t>(j) * sw + kw - 1;
            row[idx++] = (src_w < 0 || src_w >= w) ? S(0) : src[src_w];
          }
        }
      }
    }
  }
}

template <typename S>
void col2im3(const S* col, int64_t ld, int64_t cin, int64_t h, int64_t w,
             int sh, int sw, int ho, int wo, S* dx) {
  for (int64_t c = 0; c < cin; ++c) {
    for (int kh = 0; kh < 3; ++kh) {
      for (int kw = 0; kw < 3; ++kw) {
        const S* row = col + ((c * 9) + kh * 3 + kw) * ld;
        int64_t idx = 0;
        for (int i = 0; i < ho; ++i) {
          int64_t dst_h = static_cast<int64_t>(i) * sh + kh - 1;
          if (dst_h < 0 || dst_h >= h) {
            idx += wo;
            continue;
          }
          S* dst = dx + (c * h + dst_h) * w;
          for (int j = 0; j < wo; ++j) {
            int64_t dst_w = static_cast<int64_t>(j) * sw + kw - 1;
            if (dst_w >= 0 && dst_w < w) dst[dst_w] += row[idx];
            ++idx;
          }
        }
      }
    }
  }
}

template void im2col3(const double*, int64_t, int64_t, int64_t, int, int, int,
                      int, double*, int64_t);
template void im2col3(const float*, int64_t, int64_t, int64_t, int, int, int,
                      int, float*, int64_t);
template void col2im3(const double*, int64_t, int64_t, int64_t, int64_t, int,
                      int, int, int, double*);
template void col2im3(const float*, int64_t, int64_t, int64_t, int64_t, int,
                      int, int, int, float*);

template <typename S>
TensorT<S> conv2d_fwd(const TensorT<S>& x, const TensorT<S>& w,
                      const TensorT<S>& b, int sh, int sw) {
  if (x.ndim() != 3 || w.ndim() != 4)
    throw DimensionError("conv2d expects x (C,H,W) and w (Co,Ci,3,3)");
  if (x.dim(0) != w.dim(1))
    throw DimensionError("conv2d channel mismatch: input has " +
                         std::to_string(x.dim(0)) + ", kernel expects " +
                         std::to_string(w.dim(1)));
  int64_t cout = w.dim(0), cin = x.dim(0);
  int ho = static_cast<int>((x.dim(1) - 1) / sh + 1);
  int wo = static_cast<int>((x.dim(2) - 1) / sw + 1);
  int64_t p = static_cast<int64_t>(ho) * wo;

  std::vector<S> col(static_cast<size_t>(cin * 9 * p));
  im2col3(x.data.data(), cin, x.dim(1), x.dim(2), sh, sw, ho, wo, col.data(), p);

  TensorT<S> out({cout, ho, wo});
  gemm<S>(false, false, static_cast<int>(cout), static_cast<int>(p),
          static_cast<int>(cin * 9), S(1), w.data.data(), col.data(), S(0),
          out.data.data());
  for (int64_t c = 0; c < cout; ++c) {
    S bias = b.data[static_cast<size_t>(c)];
    S* o = &out.data[static_cast<size_t>(c * p)];
    for (int64_t i = 0; i < p; ++i) o[i] += bias;
  }
  return out;
}

template <typename S>
void conv2d_bwd(const TensorT<S>& x, const TensorT<S>& w, const TensorT<S>& dout,
                TensorT<S>* dx, TensorT<S>* dw, TensorT<S>* db, int sh,
                int sw) {
  int64_t cout = w.dim(0), cin = x.dim(0);
  int ho = static_cast<int>(dout.dim(1)), wo = static_cast<int>(dout.dim(2));
  int64_t p = static_cast<int64_t>(ho) * wo;

  std::vector<S> col(static_cast<size_t>(cin * 9 * p));
  im2col3(x.data.data(), cin, x.dim(1), x.dim(2), sh, sw, ho, wo, col.data(), p);

  if (db) {
    for (int64_t c = 0; c < cout; ++c) {
      S s = S(0);
      const S* g = &dout.data[static_cast<size_t>(c * p)];
      for (int64_t i = 0; i < p; ++i) s += g[i];
      db->data[static_cast<size_t>(c)] += s;
    }
  }
  if (dw) {
    gemm<S>(false, true, static_cast<int>(cout), static_cast<int>(cin * 9),
            static_cast<int>(p), S(1), dout.data.data(), col.data(), S(1),
            dw->data.data());
  }
  if (dx) {
    std::vector<S> dcol(static_cast<size_t>(cin * 9 * p));
    gemm<S>(true, false, static_cast<int>(cin * 9), static_cast<int>(p),
            static_cast<int>(cout), S(1), w.data.data(), dout.data.data(), S(0),
            dcol.data());
    dx->fill(S(0));
    col2im3(dcol.data(), p, cin, x.dim(1), x.dim(2), sh, sw, ho, wo,
            dx->data.data());
  }
}

template TensorT<double> conv2d_fwd(const TensorT<double>&, const TensorT<double>&,
                                    const TensorT<double>&, int, int);
template TensorT<float> conv2d_fwd(const TensorT<float>&, const TensorT<float>&,
                                   const TensorT<float>&, int, int);
template void conv2d_bwd(const TensorT<double>&, const TensorT<double>&,
                         const TensorT<double>&, TensorT<double>*,
                         TensorT<double>*, TensorT<double>*, int, int);
template void conv2d_bwd(const TensorT<float>&, const TensorT<float>&,
                         const TensorT<float>&, TensorT<float>*, TensorT<float>*,
                         TensorT<float>*, int, int);

}  // namespace avguard
