// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <memory>
#include <vector>

#include "avguard/autograd.hpp"
#include "avguard/conv_kernels.hpp"
#include "avguard/errors.hpp"
#include "avguard/gemm.hpp"
#include "avguard/parallel.hpp"

namespace avguard::ag {

namespace {

// even column-partition of [0, n) into worker_count() blocks
struct ColBlocks {
  int64_t n;
  int blocks;
  int64_t begin(int i) const { return n * i / blocks; }
  int64_t end(int i) const { return n * (i + 1) / blocks; }
};

ColBlocks make_blocks(int64_t n) {
  int b = std::min<int64_t>(worker_count(), std::max<int64_t>(n, 1));
  return {n, b};
}

// Graph construction and backward both run on one thread, so conv scratch
// can persist across calls; pool workers only touch disjoint slices.
std::vector<double>& conv_scratch(int which) {
  static std::vector<double> bufs[3];
  return bufs[which];
}

double* scratch_ptr(int which, size_t n) {
  std::vector<double>& buf = conv_scratch(which);
  if (buf.size() < n) buf.resize(n);
  return buf.data();
}

// batched patch matrix: (Cin*9) x (B*P), sample b occupying columns
// [b*P, (b+1)*P)
double* batched_im2col(const Tensor& x, int sh, int sw, int ho, int wo,
                       int scratch_slot) {
  int64_t batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  int64_t p = static_cast<int64_t>(ho) * wo;
  int64_t bp = batch * p;
  double* col = scratch_ptr(scratch_slot, static_cast<size_t>(cin * 9 * bp));
  parallel_for(batch, [&](int64_t n) {
    im2col3(&x.data[static_cast<size_t>(n * cin * h * w)], cin, h, w, sh, sw,
            ho, wo, col + n * p, bp);
  });
  return col;
}

}  // namespace

VarPtr conv2d(VarPtr x, VarPtr w, VarPtr b, int stride_h, int stride_w) {
  if (x->value.ndim() != 4)
    throw DimensionError("conv2d expects batched input (N,C,H,W)");
  if (x->value.dim(1) != w->value.dim(1))
    throw DimensionError("conv2d channel mismatch: input has " +
                         std::to_string(x->value.dim(1)) +
                         ", kernel expects " + std::to_string(w->value.dim(1)));
  int64_t batch = x->value.dim(0);
  int64_t cin = x->value.dim(1), cout = w->value.dim(0);
  int ho = static_cast<int>((x->value.dim(2) - 1) / stride_h + 1);
  int wo = static_cast<int>((x->value.dim(3) - 1) / stride_w + 1);
  int64_t p = static_cast<int64_t>(ho) * wo;
  int64_t bp = batch * p;
  int64_t ck = cin * 9;

  double* col = batched_im2col(x->value, stride_h, stride_w, ho, wo, 0);

  // out_mat (Cout x B*P) = W * col, split over column blocks
  double* out_mat = scratch_ptr(1, static_cast<size_t>(cout * bp));
  ColBlocks cb = make_blocks(bp);
  parallel_for(cb.blocks, [&](int64_t blk) {
    int64_t c0 = cb.begin(static_cast<int>(blk)), c1 = cb.end(static_cast<int>(blk));
    if (c1 == c0) return;
    gemm_ld<double>(false, false, static_cast<int>(cout),
                    static_cast<int>(c1 - c0), static_cast<int>(ck), 1.0,
                    w->value.data.data(), static_cast<int>(ck),
                    col + c0, static_cast<int>(bp), 0.0,
                    out_mat + c0, static_cast<int>(bp));
  });

  Tensor out({batch, cout, ho, wo});
  parallel_for(batch, [&](int64_t n) {
    for (int64_t co = 0; co < cout; ++co) {
      const double* src = out_mat + co * bp + n * p;
      double bias = b->value.data[static_cast<size_t>(co)];
      double* dst = &out.data[static_cast<size_t>((n * cout + co) * p)];
      for (int64_t i = 0; i < p; ++i) dst[i] = src[i] + bias;
    }
  });

  auto node = make_op_node(std::move(out), {x, w, b});
  if (node->requires_grad) {
    Node* pn = node.get();
    Node* px = x.get();
    Node* pw = w.get();
    Node* pb = b.get();
    node->backward_fn = [pn, px, pw, pb, batch, cin, cout, p, bp, ck, ho, wo,
                         stride_h, stride_w] {
      int64_t h = px->value.dim(2), wd = px->value.dim(3);
      double* col = batched_im2col(px->value, stride_h, stride_w, ho, wo, 0);

      // gather the upstream gradient into (Cout x B*P)
      double* dout = scratch_ptr(1, static_cast<size_t>(cout * bp));
      parallel_for(batch, [&](int64_t n) {
        for (int64_t co = 0; co < cout; ++co) {
          const double* src = &pn->grad.data[static_cast<size_t>((n * cout + co) * p)];
          std::copy(src, src + p, dout + co * bp + n * p);
        }
      });

      if (pb->requires_grad) {
        Tensor& g = pb->ensure_grad();
        for (int64_t co = 0; co < cout; ++co) {
          double s = 0.0;
          const double* row = dout + co * bp;
          for (int64_t i = 0; i < bp; ++i) s += row[i];
          g.data[static_cast<size_t>(co)] += s;
        }
      }
      if (pw->requires_grad) {
        // dW rows split across workers
        Tensor& g = pw->ensure_grad();
        ColBlocks rb = make_blocks(cout);
        parallel_for(rb.blocks, [&](int64_t blk) {
          int64_t r0 = rb.begin(static_cast<int>(blk)), r1 = rb.end(static_cast<int>(blk));
          if (r1 == r0) return;
          gemm_ld<double>(false, true, static_cast<int>(r1 - r0),
                          static_cast<int>(ck), static_cast<int>(bp), 1.0,
                          dout + r0 * bp, static_cast<int>(bp),
                          col, static_cast<int>(bp), 1.0,
                          g.data.data() + r0 * ck, static_cast<int>(ck));
        });
      }
      if (px->requires_grad) {
        double* dcol = scratch_ptr(2, static_cast<size_t>(ck * bp));
        ColBlocks cb2 = make_blocks(bp);
        parallel_for(cb2.blocks, [&](int64_t blk) {
          int64_t c0 = cb2.begin(static_cast<int>(blk)), c1 = cb2.end(static_cast<int>(blk));
          if (c1 == c0) return;
          gemm_ld<double>(true, false, static_cast<int>(ck),
                          static_cast<int>(c1 - c0), static_cast<int>(cout),
                          1.0, pw->value.data.data(), static_cast<int>(ck),
                          dout + c0, static_cast<int>(bp), 0.0,
                          dcol + c0, static_cast<int>(bp));
        });
        Tensor& g = px->ensure_grad();
        parallel_for(batch, [&](int64_t n) {
          col2im3(dcol + n * p, bp, cin, h, wd, stride_h, stride_w, ho,
                  wo, &g.data[static_cast<size_t>(n * cin * h * wd)]);
        });
      }
    };
  }
  return node;
}

VarPtr global_avg_pool(VarPtr x) {
  if (x->value.ndim() != 4)
    throw DimensionError("global_avg_pool expects (N,C,H,W)");
  int64_t batch = x->value.dim(0), c = x->value.dim(1);
  int64_t plane = x->value.dim(2) * x->value.dim(3);
  Tensor out({batch, c});
  for (int64_t n = 0; n < batch; ++n)
    for (int64_t ci = 0; ci < c; ++ci) {
      const double* src = &x->value.data[static_cast<size_t>((n * c + ci) * plane)];
      double s = 0.0;
      for (int64_t i = 0; i < plane; ++i) s += src[i];
      out.data[static_cast<size_t>(n * c + ci)] = s / static_cast<double>(plane);
    }
  auto node = make_op_node(std::move(out), {x});
  if (node->requires_grad) {
    Node* pn = node.get();
    Node* px = x.get();
    node->backward_fn = [pn, px, batch, c, plane] {
      Tensor& g = px->ensure_grad();
      for (int64_t n = 0; n < batch; ++n)
        for (int64_t ci = 0; ci < c; ++ci) {
          double gv = pn->grad.data[static_cast<size_t>(n * c + ci)] /
                      static_cast<double>(plane);
          double* dst = &g.data[static_cast<size_t>((n * c + ci) * plane)];
          for (int64_t i = 0; i < plane; ++i) dst[i] += gv;
        }
    };
  }
  return node;
}

VarPtr linear(VarPtr x, VarPtr w, VarPtr b) {
  if (x->value.ndim() != 2 || w->value.ndim() != 2)
    throw DimensionError("linear expects x (N,I) and w (I,O)");
  if (x->value.dim(1) != w->value.dim(0))
    throw DimensionError("linear: inner dimension mismatch");
  int64_t n_rows = x->value.dim(0), in = w->value.dim(0), out_c = w->value.dim(1);
  Tensor out({n_rows, out_c});
  gemm<double>(false, false, static_cast<int>(n_rows), static_cast<int>(out_c),
               static_cast<int>(in), 1.0, x->value.data.data(),
               w->value.data.data(), 0.0, out.data.data());
  for (int64_t r = 0; r < n_rows; ++r)
    for (int64_t o = 0; o < out_c; ++o)
      out.data[static_cast<size_t>(r * out_c + o)] += b->value.data[static_cast<size_t>(o)];
  auto node = make_op_node(std::move(out), {x, w, b});
  if (node->requires_grad) {
    Node* pn = node.get();
    Node* px = x.get();
    Node* pw = w.get();
    Node* pb = b.get();
    node->backward_fn = [pn, px, pw, pb, n_rows, in, out_c] {
      if (px->requires_grad) {
        Tensor& g = px->ensure_grad();
        gemm<double>(false, true, static_cast<int>(n_rows), static_cast<int>(in),
                     static_cast<int>(out_c), 1.0, pn->grad.data.data(),
                     pw->value.data.data(), 1.0, g.data.data());
      }
      if (pw->requires_grad) {
        Tensor& g = pw->ensure_grad();
        gemm<double>(true, false, static_cast<int>(in), static_cast<int>(out_c),
                     static_cast<int>(n_rows), 1.0, px->value.data.data(),
                     pn->grad.data.data(), 1.0, g.data.data());
      }
      if (pb->requires_grad) {
        Tensor& g = pb->ensure_grad();
        for (int64_t r = 0; r < n_rows; ++r)
          for (int64_t o = 0; o < out_c; ++o)
            g.data[static_cast<size_t>(o)] +=
                pn->grad.data[static_cast<size_t>(r * out_c + o)];
      }
    };
  }
  return node;
}

VarPtr l2_normalize_rows(VarPtr x, double eps) {
  if (x->value.ndim() != 2) throw DimensionError("l2_normalize_rows expects (N,C)");
  int64_t n_rows = x->value.dim(0), c = x->value.dim(1);
  Tensor out({n_rows, c});
  auto norms = std::make_shared<std::vector<double>>(static_cast<size_t>(n_rows));
  for (int64_t r = 0; r < n_rows; ++r) {
    const double* src = &x->value.data[static_cast<size_t>(r * c)];
    double s = 0.0;
    for (int64_t i = 0; i < c; ++i) s += src[i] * src[i];
    double nrm = std::sqrt(s);
    (*norms)[static_cast<size_t>(r)] = nrm;
    double inv = 1.0 / (nrm + eps);
    double* dst = &out.data[static_cast<size_t>(r * c)];
    for (int64_t i = 0; i < c; ++i) dst[i] = src[i] * inv;
  }
  auto node = make_op_node(std::move(out), {x});
  if (node->requires_grad) {
    Node* pn = node.get();
    Node* px = x.get();
    node->backward_fn = [pn, px, n_rows, c, eps, norms] {
      Tensor& g = px->ensure_grad();
      for (int64_t r = 0; r < n_rows; ++r) {
        const double* xv = &px->value.data[static_cast<size_t>(r * c)];
        const double* gy = &pn->grad.data[static_cast<size_t>(r * c)];
        double* gx = &g.data[static_cast<size_t>(r * c)];
        double nrm = (*norms)[static_cast<size_t>(r)];
        double inv = 1.0 / (nrm + eps);
        double xdg = 0.0;
        for (int64_t i = 0; i < c; ++i) xdg += xv[i] * gy[i];
        double coef = nrm > 1e-30 ? xdg / (nrm * (nrm + eps) * (nrm + eps)) : 0.0;
        for (int64_t i = 0; i < c; ++i) gx[i] += gy[i] * inv - coef * xv[i];
      }
    };
  }
  return node;
}

VarPtr info_nce(VarPtr f_a, VarPtr f_b, const Tensor& queue, double tau) {
  if (f_a->value.ndim() != 2 || f_b->value.ndim() != 2)
    throw DimensionError("info_nce expects (T,C) feature maps");
  if (!f_a->value.same_shape(f_b->value))
    throw DimensionError("info_nce: feature map shapes differ");
  int64_t t_len = f_a->value.dim(0), c = f_a->value.dim(1);
  if (t_len == 0) throw DimensionError("info_nce: empty feature map");
  int64_t q_len = queue.numel() == 0 ? 0 : queue.dim(0);
  if (q_len > 0 && queue.dim(1) != c)
    throw DimensionError("info_nce: queue feature width mismatch");
  int64_t n_cand = t_len + q_len;

  // logits[t][l] = <f_a[t], cand[l]> / tau, cand = rows of f_b then queue
  auto logits = std::make_shared<std::vector<double>>(
      static_cast<size_t>(t_len * n_cand));
  gemm<double>(false, true, static_cast<int>(t_len), static_cast<int>(t_len),
               static_cast<int>(c), 1.0 / tau, f_a->value.data.data(),
               f_b->value.data.data(), 0.0, logits->data());
  if (q_len > 0) {
    std::vector<double> qpart(static_cast<size_t>(t_len * q_len));
    gemm<double>(false, true, static_cast<int>(t_len), static_cast<int>(q_len),
                 static_cast<int>(c), 1.0 / tau, f_a->value.data.data(),
                 queue.data.data(), 0.0, qpart.data());
    // interleave into row-major (t, n_cand)
    std::vector<double> merged(static_cast<size_t>(t_len * n_cand));
    for (int64_t t = 0; t < t_len; ++t) {
      std::copy(logits->begin() + t * t_len, logits->begin() + (t + 1) * t_len,
                merged.begin() + t * n_cand);
      std::copy(qpart.begin() + t * q_len, qpart.begin() + (t + 1) * q_len,
                merged.begin() + t * n_cand + t_len);
    }
    *logits = std::move(merged);
  }

  // row-wise softmax cross-entropy with the diagonal as the positive
  auto probs = std::make_shared<std::vector<double>>(
      static_cast<size_t>(t_len * n_cand));
  double loss = 0.0;
  for (int64_t t = 0; t < t_len; ++t) {
    const double* row = logits->data() + t * n_cand;
    double mx = row[0];
    for (int64_t l = 1; l < n_cand; ++l) mx = std::max(mx, row[l]);
    double denom = 0.0;
    for (int64_t l = 0; l < n_cand; ++l) denom += std::exp(row[l] - mx);
    double lse = mx + std::log(denom);
    loss += lse - row[t];
    double* prow = probs->data() + t * n_cand;
    for (int64_t l = 0; l < n_cand; ++l) prow[l] = std::exp(row[l] - lse);
  }

  Tensor out({1});
  out.data[0] = loss;
  auto node = make_op_node(std::move(out), {f_a, f_b});
  if (node->requires_grad) {
    Node* pn = node.get();
    Node* pa = f_a.get();
    Node* pb = f_b.get();
    auto queue_copy = std::make_shared<Tensor>(queue);
    node->backward_fn = [pn, pa, pb, probs, queue_copy, t_len, c, q_len, n_cand,
                         tau] {
      double gscale = pn->grad.data[0] / tau;
      // dlogits[t][l] = probs[t][l] - delta(t==l)
      if (pa->requires_grad) {
        Tensor& ga = pa->ensure_grad();
        for (int64_t t = 0; t < t_len; ++t) {
          const double* prow = probs->data() + t * n_cand;
          double* dst = &ga.data[static_cast<size_t>(t * c)];
          for (int64_t l = 0; l < n_cand; ++l) {
            double dl = prow[l] - (l == t ? 1.0 : 0.0);
            if (dl == 0.0) continue;
            const double* cand =
                l < t_len ? &pb->value.data[static_cast<size_t>(l * c)]
                          : &queue_copy->data[static_cast<size_t>((l - t_len) * c)];
            double gv = gscale * dl;
            for (int64_t i = 0; i < c; ++i) dst[i] += gv * cand[i];
          }
        }
      }
      if (pb->requires_grad) {
        Tensor& gb = pb->ensure_grad();
        for (int64_t t = 0; t < t_len; ++t) {
          const double* prow = probs->data() + t * n_cand;
          const double* av = &pa->value.data[static_cast<size_t>(t * c)];
          for (int64_t l = 0; l < t_len; ++l) {
            double dl = prow[l] - (l == t ? 1.0 : 0.0);
            if (dl == 0.0) continue;
            double gv = gscale * dl;
            double* dst = &gb.data[static_cast<size_t>(l * c)];
            for (int64_t i = 0; i < c; ++i) dst[i] += gv * av[i];
          }
        }
      }
      (void)q_len;
    };
  }
  return node;
}

}  // namespace avguard::ag
