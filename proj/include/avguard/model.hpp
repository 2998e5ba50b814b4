// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "avguard/autograd.hpp"
#include "avguard/nn.hpp"
#include "avguard/rng.hpp"

namespace avguard {

struct ModelHyper {
  int inn_blocks = 6;
  int subnet_growth = 32;
  int subnet_layers = 5;
  double leaky_slope = 0.2;
  int feature_channels = 32;
  int sfe_base = 16;  // conv widths: base, 2*base, 4*base, 4*base
  // stream geometry the model was built for
  int frame_width = 256;
  int frame_height = 256;
  int fps = 25;
  int sample_rate = 16000;
  int stft_window = 510;
  int stft_hop = 128;
  // tamper decision threshold, calibrated on validation data after training
  double localize_threshold = 0.5;

  int chunk_samples() const { return sample_rate / fps; }
  int latent_h() const { return frame_height / 4; }
  int latent_w() const { return frame_width / 4; }
};

// A dense conv subnet holding trainable leaf parameters. Provides the graph
// forward for training and exports plain weights for the eval paths.
class DenseSubnet {
 public:
  DenseSubnet() = default;
  DenseSubnet(int in_ch, int out_ch, int growth, int layers, double slope,
              bool zero_final, Rng& rng);

  ag::VarPtr forward(ag::VarPtr x) const;

  template <typename S>
  SubnetWeights<S> weights() const;

  void collect_params(const std::string& prefix,
                      std::vector<std::pair<std::string, ag::VarPtr>>& out) const;

  int in_ch() const { return in_ch_; }
  int out_ch() const { return out_ch_; }

 private:
  int in_ch_ = 0, out_ch_ = 0, growth_ = 32, layers_ = 5;
  double slope_ = 0.2;
  std::vector<ag::VarPtr> w_, b_;
};

struct CouplingBlock {
  DenseSubnet phi, rho, eta;
};

class SfeNet {
 public:
  SfeNet() = default;
  SfeNet(int base, int out_c, double slope, Rng& rng);

  // x (N,1,bins,frames) -> unit-norm rows (N,out_c)
  ag::VarPtr forward(ag::VarPtr x) const;

  template <typename S>
  SfeWeights<S> weights() const;

  void collect_params(const std::string& prefix,
                      std::vector<std::pair<std::string, ag::VarPtr>>& out) const;

 private:
  double slope_ = 0.2;
  std::vector<ag::VarPtr> conv_w_, conv_b_;
  ag::VarPtr proj_w_, proj_b_;
};

class CmwModel {
 public:
  CmwModel() = default;
  CmwModel(const ModelHyper& hyper, uint64_t seed);

  ModelHyper hyper;
  std::vector<CouplingBlock> blocks;
  DenseSubnet estimator;  // subbands of the watermarked frame -> audio latent
  SfeNet sfe;

  // graph paths over batched tensors (N,48,h,w) and (N,1,h,w)
  std::pair<ag::VarPtr, ag::VarPtr> stack_forward(ag::VarPtr vis,
                                                  ag::VarPtr aud) const;
  std::pair<ag::VarPtr, ag::VarPtr> stack_inverse(ag::VarPtr vis,
                                                  ag::VarPtr aud) const;

  std::vector<std::pair<std::string, ag::VarPtr>> named_params() const;
  std::vector<ag::VarPtr> params() const;
  int64_t param_count() const;

  template <typename S>
  StackWeights<S> stack_weights() const {
    StackWeights<S> sw;
    for (const auto& blk : blocks)
      sw.push_back({blk.phi.weights<S>(), blk.rho.weights<S>(),
                    blk.eta.weights<S>()});
    return sw;
  }
  template <typename S>
  SubnetWeights<S> estimator_weights() const {
    return estimator.weights<S>();
  }
  template <typename S>
  SfeWeights<S> sfe_weights() const {
    return sfe.weights<S>();
  }
};

}  // namespace avguard
