// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "avguard/tensor.hpp"
#include "avguard/transforms.hpp"

namespace avguard::ag {

// Reverse-mode tape over dense double tensors. Graphs are built per step and
// torn down when the last VarPtr drops; leaves (parameters) persist across
// steps and keep their accumulated gradients until zeroed.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  bool is_leaf = false;
  int64_t id = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward_fn;

  Tensor& ensure_grad() {
    if (grad.data.empty()) grad = Tensor(value.shape);
    return grad;
  }
  void accumulate(const Tensor& g) {
    Tensor& dst = ensure_grad();
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += g.data[i];
  }
};

using VarPtr = std::shared_ptr<Node>;

VarPtr constant(Tensor v);
VarPtr leaf(Tensor v);

// Op-node constructor used by the op implementations; wires requires_grad
// from the parents. The backward_fn is attached by the caller.
VarPtr make_op_node(Tensor value, std::vector<VarPtr> parents);

// Runs reverse accumulation from a scalar root. Interior node buffers are
// released as soon as their backward has run.
void backward(const VarPtr& root);

void zero_grad(const std::vector<VarPtr>& leaves);

// ---- elementwise ----
VarPtr add(VarPtr a, VarPtr b);
VarPtr sub(VarPtr a, VarPtr b);
VarPtr mul(VarPtr a, VarPtr b);
VarPtr scale(VarPtr a, double c);
VarPtr vexp(VarPtr a);
VarPtr sigmoid(VarPtr a);
VarPtr leaky_relu(VarPtr a, double negative_slope);
// Forward clamps to [0,1]; gradient passes straight through.
VarPtr clamp01_ste(VarPtr a);
// Forward rounds to the 8-bit grid on [0,1]; gradient passes straight through.
VarPtr quantize8_ste(VarPtr a);

// ---- shape / structure ----
VarPtr concat_channels(const std::vector<VarPtr>& xs);  // along dim 1 of (N,C,H,W)

// ---- neural net ----
// x (N,Cin,H,W), w (Cout,Cin,3,3), b (Cout); 3x3 kernel, padding 1.
VarPtr conv2d(VarPtr x, VarPtr w, VarPtr b, int stride_h = 1, int stride_w = 1);
VarPtr global_avg_pool(VarPtr x);                    // (N,C,H,W) -> (N,C)
VarPtr linear(VarPtr x, VarPtr w, VarPtr b);         // (N,I)x(I,O)+(O) -> (N,O)
VarPtr l2_normalize_rows(VarPtr x, double eps = 1e-12);

// ---- reductions / losses ----
VarPtr mean_all(VarPtr a);
VarPtr mse(VarPtr a, VarPtr b);

// InfoNCE over temporally aligned rows: anchors f_a (T,C) against candidates
// [rows of f_b (T,C); queue (Q,C)], positives on the diagonal, summed over T.
// The queue receives no gradient.
VarPtr info_nce(VarPtr f_a, VarPtr f_b, const Tensor& queue, double tau);

// ---- signal ----
VarPtr haar_squeeze_op(VarPtr x);    // (N,C,H,W) -> (N,4C,H/2,W/2)
VarPtr haar_unsqueeze_op(VarPtr x);  // inverse
// plane (N,1,h4,w4) -> waveforms (N,S); exact adjoint backward.
VarPtr istft_op(VarPtr plane, const PackingLayout& layout, int out_length);
// waveforms (N,S) -> log-magnitude spectrograms (N,1,bins,frames).
VarPtr stft_logmag_op(VarPtr wave, int window_size, int hop_length,
                      double eps = 1e-8);

}  // namespace avguard::ag
