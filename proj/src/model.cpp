// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/model.hpp"

#include <cmath>

#include "avguard/errors.hpp"

namespace avguard {

namespace {

Tensor he_normal(const std::vector<int64_t>& shape, int64_t fan_in, double slope,
                 Rng& rng) {
  Tensor t(shape);
  double stdev = std::sqrt(2.0 / ((1.0 + slope * slope) * static_cast<double>(fan_in)));
  std::normal_distribution<double> dist(0.0, stdev);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

}  // namespace

DenseSubnet::DenseSubnet(int in_ch, int out_ch, int growth, int layers,
                         double slope, bool zero_final, Rng& rng)
    : in_ch_(in_ch), out_ch_(out_ch), growth_(growth), layers_(layers),
      slope_(slope) {
  for (int i = 0; i < layers; ++i) {
    int ic = in_ch + i * growth;
    int oc = (i + 1 < layers) ? growth : out_ch;
    bool final_layer = (i + 1 == layers);
    Tensor w = (final_layer && zero_final)
                   ? Tensor({oc, ic, 3, 3})
                   : he_normal({oc, ic, 3, 3}, static_cast<int64_t>(ic) * 9,
                               slope, rng);
    w_.push_back(ag::leaf(std::move(w)));
    b_.push_back(ag::leaf(Tensor({oc})));
  }
}

ag::VarPtr DenseSubnet::forward(ag::VarPtr x) const {
  std::vector<ag::VarPtr> feats{x};
  for (int i = 0; i < layers_; ++i) {
    ag::VarPtr input = feats.size() == 1 ? feats[0] : ag::concat_channels(feats);
    ag::VarPtr y = ag::conv2d(input, w_[static_cast<size_t>(i)],
                              b_[static_cast<size_t>(i)]);
    if (i + 1 < layers_) {
      feats.push_back(ag::leaky_relu(y, slope_));
    } else {
      return y;
    }
  }
  throw DimensionError("DenseSubnet::forward: no layers");
}

template <typename S>
SubnetWeights<S> DenseSubnet::weights() const {
  SubnetWeights<S> net;
  net.in_ch = in_ch_;
  net.out_ch = out_ch_;
  net.growth = growth_;
  net.layers = layers_;
  net.slope = slope_;
  for (size_t i = 0; i < w_.size(); ++i) {
    TensorT<S> w(w_[i]->value.shape), b(b_[i]->value.shape);
    for (size_t k = 0; k < w.data.size(); ++k)
      w.data[k] = static_cast<S>(w_[i]->value.data[k]);
    for (size_t k = 0; k < b.data.size(); ++k)
      b.data[k] = static_cast<S>(b_[i]->value.data[k]);
    net.w.push_back(std::move(w));
    net.b.push_back(std::move(b));
  }
  return net;
}

template SubnetWeights<double> DenseSubnet::weights() const;
template SubnetWeights<float> DenseSubnet::weights() const;

void DenseSubnet::collect_params(
    const std::string& prefix,
    std::vector<std::pair<std::string, ag::VarPtr>>& out) const {
  for (size_t i = 0; i < w_.size(); ++i) {
    out.emplace_back(prefix + ".conv" + std::to_string(i) + ".w", w_[i]);
    out.emplace_back(prefix + ".conv" + std::to_string(i) + ".b", b_[i]);
  }
}

SfeNet::SfeNet(int base, int out_c, double slope, Rng& rng) : slope_(slope) {
  int widths[4] = {base, 2 * base, 4 * base, 4 * base};
  int ic = 1;
  for (int i = 0; i < 4; ++i) {
    int oc = widths[i];
    conv_w_.push_back(ag::leaf(
        he_normal({oc, ic, 3, 3}, static_cast<int64_t>(ic) * 9, slope, rng)));
    conv_b_.push_back(ag::leaf(Tensor({oc})));
    ic = oc;
  }
  Tensor pw({ic, out_c});
  std::normal_distribution<double> dist(0.0, std::sqrt(1.0 / ic));
  for (auto& v : pw.data) v = dist(rng);
  proj_w_ = ag::leaf(std::move(pw));
  proj_b_ = ag::leaf(Tensor({out_c}));
}

ag::VarPtr SfeNet::forward(ag::VarPtr x) const {
  ag::VarPtr cur = x;
  for (size_t i = 0; i < conv_w_.size(); ++i)
    cur = ag::leaky_relu(ag::conv2d(cur, conv_w_[i], conv_b_[i], 2, 1), slope_);
  cur = ag::global_avg_pool(cur);
  cur = ag::linear(cur, proj_w_, proj_b_);
  return ag::l2_normalize_rows(cur);
}

template <typename S>
SfeWeights<S> SfeNet::weights() const {
  SfeWeights<S> net;
  net.slope = slope_;
  for (size_t i = 0; i < conv_w_.size(); ++i) {
    TensorT<S> w(conv_w_[i]->value.shape), b(conv_b_[i]->value.shape);
    for (size_t k = 0; k < w.data.size(); ++k)
      w.data[k] = static_cast<S>(conv_w_[i]->value.data[k]);
    for (size_t k = 0; k < b.data.size(); ++k)
      b.data[k] = static_cast<S>(conv_b_[i]->value.data[k]);
    net.conv_w.push_back(std::move(w));
    net.conv_b.push_back(std::move(b));
  }
  TensorT<S> pw(proj_w_->value.shape), pb(proj_b_->value.shape);
  for (size_t k = 0; k < pw.data.size(); ++k)
    pw.data[k] = static_cast<S>(proj_w_->value.data[k]);
  for (size_t k = 0; k < pb.data.size(); ++k)
    pb.data[k] = static_cast<S>(proj_b_->value.data[k]);
  net.proj_w = std::move(pw);
  net.proj_b = std::move(pb);
  return net;
}

template SfeWeights<double> SfeNet::weights() const;
template SfeWeights<float> SfeNet::weights() const;

void SfeNet::collect_params(
    const std::string& prefix,
    std::vector<std::pair<std::string, ag::VarPtr>>& out) const {
  for (size_t i = 0; i < conv_w_.size(); ++i) {
    out.emplace_back(prefix + ".conv" + std::to_string(i) + ".w", conv_w_[i]);
    out.emplace_back(prefix + ".conv" + std::to_string(i) + ".b", conv_b_[i]);
  }
  out.emplace_back(prefix + ".proj.w", proj_w_);
  out.emplace_back(prefix + ".proj.b", proj_b_);
}

CmwModel::CmwModel(const ModelHyper& h, uint64_t seed) : hyper(h) {
  for (int l = 0; l < h.inn_blocks; ++l) {
    Rng rng = make_rng(seed, static_cast<uint64_t>(l) + 1);
    CouplingBlock blk;
    blk.phi = DenseSubnet(1, 48, h.subnet_growth, h.subnet_layers, h.leaky_slope,
                          true, rng);
    blk.rho = DenseSubnet(48, 1, h.subnet_growth, h.subnet_layers, h.leaky_slope,
                          true, rng);
    blk.eta = DenseSubnet(48, 1, h.subnet_growth, h.subnet_layers, h.leaky_slope,
                          true, rng);
    blocks.push_back(std::move(blk));
  }
  Rng rng_e = make_rng(seed, 1000);
  estimator = DenseSubnet(48, 1, h.subnet_growth, h.subnet_layers, h.leaky_slope,
                          true, rng_e);
  Rng rng_s = make_rng(seed, 2000);
  sfe = SfeNet(h.sfe_base, h.feature_channels, h.leaky_slope, rng_s);
}

std::pair<ag::VarPtr, ag::VarPtr> CmwModel::stack_forward(ag::VarPtr vis,
                                                          ag::VarPtr aud) const {
  if (!all_finite(vis->value) || !all_finite(aud->value))
    throw NumericError("stack_forward: non-finite values in state");
  for (const auto& blk : blocks) {
    vis = ag::add(vis, blk.phi.forward(aud));
    ag::VarPtr mult = ag::vexp(ag::sigmoid(blk.rho.forward(vis)));
    aud = ag::add(ag::mul(aud, mult), blk.eta.forward(vis));
  }
  return {vis, aud};
}

std::pair<ag::VarPtr, ag::VarPtr> CmwModel::stack_inverse(ag::VarPtr vis,
                                                          ag::VarPtr aud) const {
  if (!all_finite(vis->value) || !all_finite(aud->value))
    throw NumericError("stack_inverse: non-finite values in state");
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    ag::VarPtr mult = ag::vexp(ag::scale(ag::sigmoid(it->rho.forward(vis)), -1.0));
    aud = ag::mul(ag::sub(aud, it->eta.forward(vis)), mult);
    vis = ag::sub(vis, it->phi.forward(aud));
  }
  return {vis, aud};
}

std::vector<std::pair<std::string, ag::VarPtr>> CmwModel::named_params() const {
  std::vector<std::pair<std::string, ag::VarPtr>> out;
  for (size_t l = 0; l < blocks.size(); ++l) {
    std::string p = "block" + std::to_string(l);
    blocks[l].phi.collect_params(p + ".phi", out);
    blocks[l].rho.collect_params(p + ".rho", out);
    blocks[l].eta.collect_params(p + ".eta", out);
  }
  estimator.collect_params("estimator", out);
  sfe.collect_params("sfe", out);
  return out;
}

std::vector<ag::VarPtr> CmwModel::params() const {
  std::vector<ag::VarPtr> out;
  for (auto& [name, p] : named_params()) out.push_back(p);
  return out;
}

int64_t CmwModel::param_count() const {
  int64_t n = 0;
  for (const auto& p : params()) n += p->value.numel();
  return n;
}

}  // namespace avguard
