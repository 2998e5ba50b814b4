// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "avguard/tensor.hpp"

namespace avguard {

struct TamperInterval {
  double t_start = 0.0;
  double t_end = 0.0;
};

// Sentinel for identical inputs where the true ratio diverges.
inline constexpr double kDbCap = 200.0;

// 10*log10(|ref|^2 / |ref-est|^2), capped at kDbCap.
double snr_db(std::span<const double> ref, std::span<const double> est);

// Peak 1.0; expects frames as (C,H,W) in [0,1].
double psnr_db(const Tensor& ref, const Tensor& est);

// Mean SSIM over valid 11x11 windows (Gaussian weights, sigma 1.5),
// averaged over channels; standard stabilization constants at peak 1.
double ssim(const Tensor& ref, const Tensor& est);

// Total intersection over total union of the merged interval sets.
// Two empty sets agree perfectly and give 1.0.
double interval_iou(std::vector<TamperInterval> predicted,
                    std::vector<TamperInterval> truth);

// scores are tamper likelihoods (higher = more likely positive);
// labels are 0/1. Ties are handled as threshold groups.
double average_precision(std::span<const double> scores,
                         std::span<const int> labels);

// Mann-Whitney AUC with ties counted half. Throws if only one class present.
double auc_score(std::span<const double> scores, std::span<const int> labels);

// RMS difference of log-magnitude spectrograms, each floored at -80 dB.
double log_spectral_distance(std::span<const double> ref,
                             std::span<const double> est, int window_size = 510,
                             int hop_length = 128);

struct MetricReport {
  std::optional<double> snr_db;
  std::optional<double> lsd;
  std::optional<double> psnr_db;
  std::optional<double> ssim;
  std::optional<double> iou;
  std::optional<double> ap;
  std::optional<double> auc;

  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& j);
};

}  // namespace avguard
