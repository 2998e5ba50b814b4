// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>

#include "avguard/datagen.hpp"
#include "avguard/model.hpp"
#include "avguard/tamper.hpp"
#include "avguard/training.hpp"

namespace avguard {

// Flat key = value experiment configuration. Unknown keys are rejected.
struct ExperimentConfig {
  // paths
  std::string dataset_dir;
  std::string val_dir;
  std::string output_dir;
  std::string checkpoint;
  std::string input_dir;
  std::string original_dir;
  std::string donor_dir;
  std::string ground_truth;
  std::string recovered_audio;
  std::string watermarked_dir;
  std::string report;

  // stream geometry
  int frame_width = 256;
  int frame_height = 256;
  int fps = 25;
  int sample_rate = 16000;
  int stft_window = 510;
  int stft_hop = 128;

  // model
  int inn_blocks = 6;
  int subnet_growth = 32;
  int feature_channels = 32;
  int sfe_base = 16;

  // training
  TrainConfig train;
  LossWeights weights;
  MaskSpec mask;
  bool resume = false;

  // tampering & localization
  TamperPlan tamper;
  int median_width = 3;
  int min_run = 2;
  double localize_threshold = std::numeric_limits<double>::quiet_NaN();  // NaN = use checkpoint

  // synthetic data
  SynthSpec synth;

  uint64_t seed = 1;

  ModelHyper hyper() const;
  void validate() const;

  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig parse(const std::string& text);
};

}  // namespace avguard
