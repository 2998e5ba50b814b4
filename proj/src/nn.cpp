// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/nn.hpp"

#include <cmath>

#include "avguard/conv_kernels.hpp"
#include "avguard/errors.hpp"

namespace avguard {

namespace {

template <typename S>
TensorT<S> concat_ch3(const std::vector<const TensorT<S>*>& xs) {
  int64_t h = xs[0]->dim(1), w = xs[0]->dim(2);
  int64_t c_total = 0;
  for (auto* x : xs) c_total += x->dim(0);
  TensorT<S> out({c_total, h, w});
  int64_t off = 0;
  for (auto* x : xs) {
    std::copy(x->data.begin(), x->data.end(),
              out.data.begin() + static_cast<size_t>(off * h * w));
    off += x->dim(0);
  }
  return out;
}

template <typename S>
void leaky_inplace(TensorT<S>& x, double slope) {
  for (auto& v : x.data)
    if (v < S(0)) v = static_cast<S>(v * slope);
}

}  // namespace

template <typename S>
TensorT<S> subnet_eval(const SubnetWeights<S>& net, const TensorT<S>& x) {
  if (x.ndim() != 3) throw DimensionError("subnet_eval expects (C,H,W)");
  if (x.dim(0) != net.in_ch)
    throw DimensionError("subnet_eval: expected " + std::to_string(net.in_ch) +
                         " input channels, got " + std::to_string(x.dim(0)));
  std::vector<TensorT<S>> feats;
  feats.reserve(static_cast<size_t>(net.layers));
  for (int i = 0; i < net.layers; ++i) {
    std::vector<const TensorT<S>*> ins{&x};
    for (const auto& f : feats) ins.push_back(&f);
    TensorT<S> input = ins.size() == 1 ? x : concat_ch3(ins);
    TensorT<S> y = conv2d_fwd(input, net.w[static_cast<size_t>(i)],
                              net.b[static_cast<size_t>(i)]);
    if (i + 1 < net.layers) {
      leaky_inplace(y, net.slope);
      feats.push_back(std::move(y));
    } else {
      return y;
    }
  }
  throw DimensionError("subnet_eval: no layers");
}

template <typename S>
void coupling_forward_eval(const CouplingWeights<S>& blk, TensorT<S>& vis,
                           TensorT<S>& aud) {
  TensorT<S> dv = subnet_eval(blk.phi, aud);
  for (size_t i = 0; i < vis.data.size(); ++i) vis.data[i] += dv.data[i];
  TensorT<S> r = subnet_eval(blk.rho, vis);
  TensorT<S> e = subnet_eval(blk.eta, vis);
  for (size_t i = 0; i < aud.data.size(); ++i) {
    double sig = 1.0 / (1.0 + std::exp(-static_cast<double>(r.data[i])));
    aud.data[i] = static_cast<S>(aud.data[i] * std::exp(sig) + e.data[i]);
  }
}

template <typename S>
void coupling_inverse_eval(const CouplingWeights<S>& blk, TensorT<S>& vis,
                           TensorT<S>& aud) {
  TensorT<S> r = subnet_eval(blk.rho, vis);
  TensorT<S> e = subnet_eval(blk.eta, vis);
  for (size_t i = 0; i < aud.data.size(); ++i) {
    double sig = 1.0 / (1.0 + std::exp(-static_cast<double>(r.data[i])));
    aud.data[i] = static_cast<S>((aud.data[i] - e.data[i]) * std::exp(-sig));
  }
  TensorT<S> dv = subnet_eval(blk.phi, aud);
  for (size_t i = 0; i < vis.data.size(); ++i) vis.data[i] -= dv.data[i];
}

template <typename S>
void stack_forward_eval(const StackWeights<S>& stack, TensorT<S>& vis,
                        TensorT<S>& aud) {
  if (!all_finite(vis) || !all_finite(aud))
    throw NumericError("stack_forward_eval: non-finite values in state");
  for (const auto& blk : stack) coupling_forward_eval(blk, vis, aud);
}

template <typename S>
void stack_inverse_eval(const StackWeights<S>& stack, TensorT<S>& vis,
                        TensorT<S>& aud) {
  if (!all_finite(vis) || !all_finite(aud))
    throw NumericError("stack_inverse_eval: non-finite values in state");
  for (auto it = stack.rbegin(); it != stack.rend(); ++it)
    coupling_inverse_eval(*it, vis, aud);
}

template <typename S>
std::vector<S> sfe_eval(const SfeWeights<S>& net, const TensorT<S>& logmag) {
  if (logmag.ndim() != 3 || logmag.dim(0) != 1)
    throw DimensionError("sfe_eval expects a (1,bins,frames) spectrogram");
  TensorT<S> cur = logmag;
  for (size_t i = 0; i < net.conv_w.size(); ++i) {
    cur = conv2d_fwd(cur, net.conv_w[i], net.conv_b[i], 2, 1);
    leaky_inplace(cur, net.slope);
  }
  // global average pooling
  int64_t c = cur.dim(0), plane = cur.dim(1) * cur.dim(2);
  std::vector<S> pooled(static_cast<size_t>(c));
  for (int64_t ci = 0; ci < c; ++ci) {
    double s = 0.0;
    const S* src = &cur.data[static_cast<size_t>(ci * plane)];
    for (int64_t i = 0; i < plane; ++i) s += static_cast<double>(src[i]);
    pooled[static_cast<size_t>(ci)] = static_cast<S>(s / static_cast<double>(plane));
  }
  int64_t out_c = net.proj_w.dim(1);
  std::vector<S> feat(static_cast<size_t>(out_c));
  for (int64_t o = 0; o < out_c; ++o) {
    double s = static_cast<double>(net.proj_b.data[static_cast<size_t>(o)]);
    for (int64_t i = 0; i < c; ++i)
      s += static_cast<double>(pooled[static_cast<size_t>(i)]) *
           static_cast<double>(net.proj_w.data[static_cast<size_t>(i * out_c + o)]);
    feat[static_cast<size_t>(o)] = static_cast<S>(s);
  }
  double nrm = 0.0;
  for (S v : feat) nrm += static_cast<double>(v) * static_cast<double>(v);
  nrm = std::sqrt(nrm);
  double inv = 1.0 / (nrm + 1e-12);
  for (S& v : feat) v = static_cast<S>(v * inv);
  return feat;
}

#define AVG_INSTANTIATE(S)                                                     \
  template TensorT<S> subnet_eval(const SubnetWeights<S>&, const TensorT<S>&); \
  template void coupling_forward_eval(const CouplingWeights<S>&, TensorT<S>&,  \
                                      TensorT<S>&);                            \
  template void coupling_inverse_eval(const CouplingWeights<S>&, TensorT<S>&,  \
                                      TensorT<S>&);                            \
  template void stack_forward_eval(const StackWeights<S>&, TensorT<S>&,        \
                                   TensorT<S>&);                               \
  template void stack_inverse_eval(const StackWeights<S>&, TensorT<S>&,        \
                                   TensorT<S>&);                               \
  template std::vector<S> sfe_eval(const SfeWeights<S>&, const TensorT<S>&);

AVG_INSTANTIATE(double)
AVG_INSTANTIATE(float)
#undef AVG_INSTANTIATE

}  // namespace avguard
