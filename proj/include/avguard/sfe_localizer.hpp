// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "avguard/metrics.hpp"
#include "avguard/nn.hpp"
#include "avguard/tensor.hpp"

namespace avguard {

struct FeatureMap {
  Tensor features;  // (T,C), rows unit-normalized
  double timestep_duration = 0.04;
};

// One feature row per chunk (one video frame interval). Audio length must be
// a positive multiple of chunk_samples.
FeatureMap extract_features(std::span<const double> audio,
                            const SfeWeights<double>& sfe, int chunk_samples,
                            int stft_window, int stft_hop,
                            double timestep_duration);

struct TamperScoreSeries {
  std::vector<double> scores;  // one cosine score per timestep
  double timestep_duration = 0.04;
};

// Per-timestep inner products of the two maps' rows, median-smoothed.
TamperScoreSeries similarity_scores(const FeatureMap& a, const FeatureMap& b,
                                    int median_width = 3);

// Timestep t is tampered iff score_t < threshold; maximal runs are merged
// and runs shorter than min_run timesteps are discarded.
std::vector<TamperInterval> scores_to_intervals(const TamperScoreSeries& series,
                                                double threshold,
                                                int min_run = 2);

// Ablation baseline: per-chunk mean squared difference mapped monotonically
// into (0,1], higher = more similar.
TamperScoreSeries raw_waveform_scores(std::span<const double> a,
                                      std::span<const double> b,
                                      int chunk_samples,
                                      double timestep_duration);

struct TamperReport {
  TamperScoreSeries scores;
  double threshold = 0.5;
  std::vector<TamperInterval> intervals;
  MetricReport metrics;

  nlohmann::json to_json() const;
  static TamperReport from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static TamperReport load(const std::filesystem::path& path);
};

}  // namespace avguard
