// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>

#include "avguard/pipeline.hpp"

namespace avguard {

struct SynthSpec {
  int n_clips = 4;
  double duration_s = 2.0;
  int width = 64;
  int height = 64;
  int fps = 25;
  int sample_rate = 2000;
  uint64_t seed = 1;
};

// Procedural clip: smooth-noise background with drifting solid shapes, and
// note-structured audio (tone mixtures over an amplitude-modulated noise
// bed). Pixels land on the 8-bit grid and samples on the 16-bit grid, so
// containers round-trip bit-exactly.
AVStream gen_synthetic_clip(const SynthSpec& spec, uint64_t clip_index);

// Writes clip_0000, clip_0001, ... under out_dir.
void gen_synthetic_dataset(const std::filesystem::path& out_dir,
                           const SynthSpec& spec);

}  // namespace avguard
