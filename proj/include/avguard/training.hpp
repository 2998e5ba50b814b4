// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "avguard/model.hpp"
#include "avguard/pipeline.hpp"
#include "avguard/tamper.hpp"

namespace avguard {

struct LossWeights {
  double lambda_wl = 10.0;
  double lambda_vrl = 0.1;
  double lambda_arl = 10.0;
  double lambda_sfcl = 1.0;
  double tau = 0.07;
};

struct Box {
  int x = 0, y = 0, w = 0, h = 0;
};

struct MaskSpec {
  enum class Mode { kNone, kRandomRects, kRegionBoxes };
  Mode mode = Mode::kNone;
  int rect_count_min = 1;
  int rect_count_max = 3;
  int side_min = 20;
  int side_max = 150;
  std::vector<Box> region_boxes;
};

// Binary (1,h,w) mask; 1 marks pixels where the watermark is destroyed
// (original content restored).
Tensor gen_mask(const MaskSpec& spec, int h, int w, Rng& rng);

// M (.) I_org + (1 - M) (.) I_wm, mask broadcast over channels.
Tensor apply_mask(const Tensor& i_org, const Tensor& i_wm, const Tensor& mask);

// Mean-squared-error losses over frames and waveforms.
double loss_wl(const Tensor& i_wm, const Tensor& i_org);
double loss_vrl(const Tensor& i_org, const Tensor& i_rec);
double loss_arl(std::span<const double> a_org, std::span<const double> a_rec);

// FIFO memory bank of unit feature vectors used as contrastive negatives.
class FeatureQueue {
 public:
  FeatureQueue(int64_t capacity, int64_t dim);

  void push_rows(const Tensor& rows);  // (T,C); oldest entries evicted
  Tensor snapshot() const;             // (size,C) in insertion order
  int64_t size() const { return size_; }
  int64_t capacity() const { return capacity_; }
  int64_t dim() const { return dim_; }

  Tensor serialize_storage() const;
  void restore(const Tensor& storage, int64_t size, int64_t head);
  int64_t head() const { return head_; }

 private:
  int64_t capacity_ = 0, dim_ = 0, size_ = 0, head_ = 0;
  std::vector<double> storage_;
};

// InfoNCE over aligned feature rows with in-map and queue negatives, summed
// over timesteps; pushes the recovered features afterwards (detached).
double loss_sfcl(const Tensor& f_org, const Tensor& f_rec, FeatureQueue& queue,
                 double tau);

class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps = 1e-8);

  void step(const std::vector<ag::VarPtr>& params);

  int64_t t() const { return t_; }
  double lr() const { return lr_; }
  // state round-trip for resumable training
  std::vector<Tensor> state_tensors() const;
  void restore(std::vector<Tensor> state, int64_t t);

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.5;
  int iterations = 10000;
  int batch_size = 4;
  uint64_t seed = 1;
  int64_t queue_capacity = 65536;
  bool quantize = true;
  int checkpoint_interval = 1000;
  int validation_interval = 1000;
  int log_interval = 25;
};

// A contiguous run of segments from one clip.
struct BatchData {
  Tensor frames;  // (B,3,H,W)
  Tensor chunks;  // (B,S)
  PackingLayout layout;
};

BatchData make_batch(const AVStream& clip, int start_frame, int batch_size,
                     int stft_window, int stft_hop);

struct ObjectiveParts {
  ag::VarPtr total, wl, vrl, arl, sfcl;
  ag::VarPtr f_rec;  // (B,C) recovered-audio features
};

// The full training graph: embed (with straight-through quantization),
// watermark destruction by masking, recovery, and the four loss terms.
ObjectiveParts build_objective(const CmwModel& model, const BatchData& batch,
                               const LossWeights& weights,
                               const std::vector<Tensor>& masks,
                               const Tensor& queue_snapshot, bool quantize);

struct StepBreakdown {
  double total = 0, wl = 0, vrl = 0, arl = 0, sfcl = 0;
};

StepBreakdown train_step(const CmwModel& model, const BatchData& batch,
                         const LossWeights& weights,
                         const std::vector<Tensor>& masks, FeatureQueue& queue,
                         Adam& optimizer, bool quantize);

struct ValidationResult {
  double recovery_snr = 0;  // untampered recovery
  double psnr = 0;
  double ssim = 0;
  double tampered_snr = 0;  // recovery from the tampered stream
  double auc = 0;
  double ap = 0;
  double iou = 0;             // at best_threshold
  double raw_ap = 0;          // raw-waveform scoring baseline
  double best_threshold = 0;  // IoU-maximizing decision threshold
};

ValidationResult validate_model(const CmwModel& model,
                                const std::vector<AVStream>& val_clips,
                                const TamperPlan& eval_plan, uint64_t seed);

struct TrainOutcome {
  ValidationResult final_validation;
  int iterations_run = 0;
};

using ProgressFn = std::function<void(int iter, const StepBreakdown&)>;

// Full loop: seeded batch sampling, stepping, periodic logging/validation/
// checkpointing; resumable from <checkpoint>.state.
TrainOutcome train(CmwModel& model, const std::vector<AVStream>& train_clips,
                   const std::vector<AVStream>& val_clips,
                   const TrainConfig& cfg, const LossWeights& weights,
                   const MaskSpec& mask_spec, const TamperPlan& eval_plan,
                   const std::filesystem::path& checkpoint_path,
                   const std::filesystem::path& log_path, bool resume = false,
                   const ProgressFn& progress = {});

}  // namespace avguard
