// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "avguard/tensor.hpp"

namespace avguard {

// Densely connected conv subnet: five 3x3 layers, each consuming the block
// input concatenated with every previous layer output; Leaky ReLU between
// layers, linear final projection.
template <typename S>
struct SubnetWeights {
  int in_ch = 0;
  int out_ch = 0;
  int growth = 32;
  int layers = 5;
  double slope = 0.2;
  std::vector<TensorT<S>> w;  // per layer: (out,in,3,3)
  std::vector<TensorT<S>> b;  // per layer: (out)
};

template <typename S>
TensorT<S> subnet_eval(const SubnetWeights<S>& net, const TensorT<S>& x);

template <typename S>
struct CouplingWeights {
  SubnetWeights<S> phi;  // audio -> visual-shaped residual
  SubnetWeights<S> rho;  // visual -> log-multiplier (through sigmoid)
  SubnetWeights<S> eta;  // visual -> audio-shaped residual
};

template <typename S>
using StackWeights = std::vector<CouplingWeights<S>>;

// One coupling step, in place. vis is (Cv,h,w), aud is (Ca,h,w).
template <typename S>
void coupling_forward_eval(const CouplingWeights<S>& blk, TensorT<S>& vis,
                           TensorT<S>& aud);
template <typename S>
void coupling_inverse_eval(const CouplingWeights<S>& blk, TensorT<S>& vis,
                           TensorT<S>& aud);

template <typename S>
void stack_forward_eval(const StackWeights<S>& stack, TensorT<S>& vis,
                        TensorT<S>& aud);
template <typename S>
void stack_inverse_eval(const StackWeights<S>& stack, TensorT<S>& vis,
                        TensorT<S>& aud);

// Audio feature extractor: conv stack striding down the frequency axis,
// global average pooling, linear projection, row L2 normalization.
template <typename S>
struct SfeWeights {
  std::vector<TensorT<S>> conv_w;
  std::vector<TensorT<S>> conv_b;
  TensorT<S> proj_w;  // (hidden, C)
  TensorT<S> proj_b;  // (C)
  double slope = 0.2;
};

// logmag is a (1,bins,frames) chunk spectrogram; returns a unit-norm C-vector.
template <typename S>
std::vector<S> sfe_eval(const SfeWeights<S>& net, const TensorT<S>& logmag);

}  // namespace avguard
