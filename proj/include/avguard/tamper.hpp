// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "avguard/metrics.hpp"
#include "avguard/pipeline.hpp"
#include "avguard/rng.hpp"

namespace avguard {

struct TamperPlan {
  enum class AudioMode { kNone, kSwap, kSubstitute };
  enum class Generator { kNoise, kTone, kShuffle };
  enum class VisualMode { kNone, kRegionReplace, kRegionNoise };

  AudioMode audio_mode = AudioMode::kSwap;
  double fraction = 0.2;  // of the stream duration, in [0.10, 0.30]
  Generator generator = Generator::kTone;
  VisualMode visual_mode = VisualMode::kNone;
  // Region box; a non-positive width selects a centered default box.
  int box_x = -1, box_y = -1, box_w = -1, box_h = -1;
  // Lip-sync style forgery touches every frame; set false to restrict the
  // visual corruption to frames inside the tampered audio interval.
  bool visual_all_frames = true;
  uint64_t seed = 0;
};

void validate_plan(const TamperPlan& plan);

struct GroundTruth {
  std::vector<TamperInterval> audio_intervals;
  std::vector<int> tampered_frame_indices;

  nlohmann::json to_json() const;
  static GroundTruth from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static GroundTruth load(const std::filesystem::path& path);
};

inline constexpr double kCrossfadeSeconds = 0.005;

// Replaces one contiguous segment of the stated fraction with donor content,
// crossfaded over 5 ms inside the interval boundaries.
std::pair<AVStream, GroundTruth> swap_audio(const AVStream& stream,
                                            double fraction,
                                            std::span<const double> donor,
                                            Rng& rng);

// Replaces one contiguous segment with a synthetic signal, RMS-matched to the
// segment it displaces.
std::pair<AVStream, GroundTruth> substitute_audio(const AVStream& stream,
                                                  double fraction,
                                                  TamperPlan::Generator gen,
                                                  Rng& rng);

// Corrupts a box region in the listed frames. kRegionReplace copies from
// `originals` when given (watermark destroyed exactly), else blurs the region;
// kRegionNoise adds clamped Gaussian pixel noise (sigma 0.05).
void tamper_frames(std::vector<Tensor>& frames, const std::vector<int>& indices,
                   TamperPlan::VisualMode mode, int box_x, int box_y, int box_w,
                   int box_h, const std::vector<Tensor>* originals, Rng& rng);

// Runs the full plan against a watermarked stream. `donor` feeds kSwap;
// `original_frames` feeds kRegionReplace when available.
std::pair<AVStream, GroundTruth> apply_plan(
    const AVStream& stream, const TamperPlan& plan,
    std::span<const double> donor = {},
    const std::vector<Tensor>* original_frames = nullptr);

// Per-timestep binary labels: 1 when at least min_overlap of the chunk lies
// inside a tampered interval.
std::vector<int> interval_labels(const std::vector<TamperInterval>& intervals,
                                 int n_timesteps, double timestep_duration,
                                 double min_overlap = 0.5);

}  // namespace avguard
