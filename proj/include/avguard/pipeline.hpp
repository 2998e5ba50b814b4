// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>
#include <vector>

#include "avguard/nn.hpp"
#include "avguard/tensor.hpp"
#include "avguard/transforms.hpp"

namespace avguard {

struct AVStream {
  std::vector<Tensor> frames;  // each (3,H,W), values in [0,1]
  std::vector<double> audio;   // values in [-1,1]
  int fps = 25;
  int sample_rate = 16000;

  int chunk_samples() const { return sample_rate / fps; }
  int64_t frame_height() const { return frames.empty() ? 0 : frames[0].dim(1); }
  int64_t frame_width() const { return frames.empty() ? 0 : frames[0].dim(2); }
  double duration() const {
    return static_cast<double>(audio.size()) / sample_rate;
  }
};

// Checks the audio/frame alignment invariants; throws on violation.
void validate_stream(const AVStream& stream);

struct AVSegmentView {
  const Tensor* frame;
  std::span<const double> chunk;
  int index;
};

// One segment per frame; chunks are consecutive, non-overlapping and cover
// the audio exactly.
std::vector<AVSegmentView> segment_stream(const AVStream& stream);

struct EmbedOptions {
  bool clamp = true;
  bool quantize = true;
  bool keep_latents = false;  // retain the discarded audio-side outputs
};

struct EmbedResult {
  std::vector<Tensor> frames;
  PackingLayout layout;
  std::vector<Tensor> audio_latents;  // (1,h4,w4) per frame when kept
};

EmbedResult embed(const AVStream& stream, const StackWeights<double>& stack,
                  int stft_window, int stft_hop, const EmbedOptions& opts = {});

struct RecoverResult {
  std::vector<double> audio;
  std::vector<Tensor> frames;
};

// Per-frame inversion driven by the noise estimator's latent prediction.
// Frame i never reads any other frame.
RecoverResult recover(const std::vector<Tensor>& frames,
                      const StackWeights<double>& stack,
                      const SubnetWeights<double>& estimator,
                      const PackingLayout& layout, int chunk_samples);

// Inversion with externally supplied audio-side latents instead of the
// estimator; the analysis path for the exact-invertibility checks.
RecoverResult recover_with_latents(const std::vector<Tensor>& frames,
                                   const StackWeights<double>& stack,
                                   const std::vector<Tensor>& latents,
                                   const PackingLayout& layout,
                                   int chunk_samples);

}  // namespace avguard
