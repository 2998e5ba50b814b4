// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "avguard/errors.hpp"
#include "avguard/metrics.hpp"
#include "avguard/model_io.hpp"
#include "avguard/sfe_localizer.hpp"

namespace avguard {

Tensor gen_mask(const MaskSpec& spec, int h, int w, Rng& rng) {
  Tensor mask({1, h, w});
  switch (spec.mode) {
    case MaskSpec::Mode::kNone:
      break;
    case MaskSpec::Mode::kRandomRects: {
      int count = std::uniform_int_distribution<int>(spec.rect_count_min,
                                                     spec.rect_count_max)(rng);
      for (int r = 0; r < count; ++r) {
        int sw = std::uniform_int_distribution<int>(spec.side_min, spec.side_max)(rng);
        int sh = std::uniform_int_distribution<int>(spec.side_min, spec.side_max)(rng);
        sw = std::min(sw, w);
        sh = std::min(sh, h);
        int x = std::uniform_int_distribution<int>(0, w - sw)(rng);
        int y = std::uniform_int_distribution<int>(0, h - sh)(rng);
        for (int i = y; i < y + sh; ++i)
          for (int j = x; j < x + sw; ++j) mask.at3(0, i, j) = 1.0;
      }
      break;
    }
    case MaskSpec::Mode::kRegionBoxes: {
      for (const Box& b : spec.region_boxes) {
        if (b.x < 0 || b.y < 0 || b.w <= 0 || b.h <= 0 || b.x + b.w > w ||
            b.y + b.h > h)
          throw DimensionError("mask region box out of frame bounds");
        for (int i = b.y; i < b.y + b.h; ++i)
          for (int j = b.x; j < b.x + b.w; ++j) mask.at3(0, i, j) = 1.0;
      }
      break;
    }
  }
  return mask;
}

Tensor apply_mask(const Tensor& i_org, const Tensor& i_wm, const Tensor& mask) {
  if (!i_org.same_shape(i_wm)) throw DimensionError("apply_mask: frame shapes differ");
  if (mask.dim(1) != i_org.dim(1) || mask.dim(2) != i_org.dim(2))
    throw DimensionError("apply_mask: mask size differs from frames");
  Tensor out = i_wm;
  int64_t plane = i_org.dim(1) * i_org.dim(2);
  for (int64_t c = 0; c < i_org.dim(0); ++c)
    for (int64_t i = 0; i < plane; ++i) {
      double m = mask.data[static_cast<size_t>(i)];
      size_t idx = static_cast<size_t>(c * plane + i);
      out.data[idx] = m * i_org.data[idx] + (1.0 - m) * i_wm.data[idx];
    }
  return out;
}

namespace {

double mse_value(const double* a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(n);
}

}  // namespace

double loss_wl(const Tensor& i_wm, const Tensor& i_org) {
  if (!i_wm.same_shape(i_org)) throw DimensionError("loss_wl: shape mismatch");
  return mse_value(i_wm.data.data(), i_org.data.data(), i_wm.data.size());
}

double loss_vrl(const Tensor& i_org, const Tensor& i_rec) {
  if (!i_org.same_shape(i_rec)) throw DimensionError("loss_vrl: shape mismatch");
  return mse_value(i_org.data.data(), i_rec.data.data(), i_org.data.size());
}

double loss_arl(std::span<const double> a_org, std::span<const double> a_rec) {
  if (a_org.size() != a_rec.size()) throw DimensionError("loss_arl: length mismatch");
  return mse_value(a_org.data(), a_rec.data(), a_org.size());
}

FeatureQueue::FeatureQueue(int64_t capacity, int64_t dim)
    : capacity_(capacity), dim_(dim) {
  if (capacity <= 0 || dim <= 0)
    throw DimensionError("feature queue needs positive capacity and dim");
  storage_.assign(static_cast<size_t>(capacity * dim), 0.0);
}

void FeatureQueue::push_rows(const Tensor& rows) {
  if (rows.ndim() != 2 || rows.dim(1) != dim_)
    throw DimensionError("feature queue: row width mismatch");
  for (int64_t r = 0; r < rows.dim(0); ++r) {
    std::copy(rows.data.begin() + r * dim_, rows.data.begin() + (r + 1) * dim_,
              storage_.begin() + head_ * dim_);
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
  }
}

Tensor FeatureQueue::snapshot() const {
  Tensor out({size_, dim_});
  if (size_ == 0) return Tensor({0, dim_});
  // oldest first
  int64_t oldest = size_ < capacity_ ? 0 : head_;
  for (int64_t i = 0; i < size_; ++i) {
    int64_t src = (oldest + i) % capacity_;
    std::copy(storage_.begin() + src * dim_, storage_.begin() + (src + 1) * dim_,
              out.data.begin() + i * dim_);
  }
  return out;
}

Tensor FeatureQueue::serialize_storage() const {
  Tensor t({capacity_, dim_});
  t.data.assign(storage_.begin(), storage_.end());
  return t;
}

void FeatureQueue::restore(const Tensor& storage, int64_t size, int64_t head) {
  if (storage.dim(0) != capacity_ || storage.dim(1) != dim_)
    throw DimensionError("feature queue: restore shape mismatch");
  storage_.assign(storage.data.begin(), storage.data.end());
  size_ = size;
  head_ = head;
}

double loss_sfcl(const Tensor& f_org, const Tensor& f_rec, FeatureQueue& queue,
                 double tau) {
  if (!f_org.same_shape(f_rec)) throw DimensionError("loss_sfcl: shape mismatch");
  if (f_org.numel() == 0) throw DimensionError("loss_sfcl: empty feature map");
  Tensor snap = queue.snapshot();
  ag::VarPtr loss = ag::info_nce(ag::constant(f_org), ag::constant(f_rec), snap, tau);
  queue.push_rows(f_rec);
  return loss->value.data[0];
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(const std::vector<ag::VarPtr>& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p->value.shape);
      v_.emplace_back(p->value.shape);
    }
  }
  if (m_.size() != params.size())
    throw DimensionError("adam: parameter count changed");
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& g = params[pi]->ensure_grad();
    Tensor& m = m_[pi];
    Tensor& v = v_[pi];
    Tensor& w = params[pi]->value;
    for (size_t i = 0; i < w.data.size(); ++i) {
      double gi = g.data[i];
      m.data[i] = beta1_ * m.data[i] + (1.0 - beta1_) * gi;
      v.data[i] = beta2_ * v.data[i] + (1.0 - beta2_) * gi * gi;
      double mhat = m.data[i] / bc1;
      double vhat = v.data[i] / bc2;
      w.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

std::vector<Tensor> Adam::state_tensors() const {
  std::vector<Tensor> out;
  for (const auto& m : m_) out.push_back(m);
  for (const auto& v : v_) out.push_back(v);
  return out;
}

void Adam::restore(std::vector<Tensor> state, int64_t t) {
  if (state.size() % 2 != 0) throw DimensionError("adam: bad state tensor count");
  size_t n = state.size() / 2;
  m_.assign(state.begin(), state.begin() + static_cast<int64_t>(n));
  v_.assign(state.begin() + static_cast<int64_t>(n), state.end());
  t_ = t;
}

BatchData make_batch(const AVStream& clip, int start_frame, int batch_size,
                     int stft_window, int stft_hop) {
  int s = clip.chunk_samples();
  int64_t h = clip.frame_height(), w = clip.frame_width();
  if (start_frame < 0 ||
      start_frame + batch_size > static_cast<int>(clip.frames.size()))
    throw DimensionError("make_batch: window out of clip bounds");
  BatchData batch;
  batch.frames = Tensor({batch_size, 3, h, w});
  batch.chunks = Tensor({batch_size, s});
  batch.layout.window_size = stft_window;
  batch.layout.hop_length = stft_hop;
  for (int b = 0; b < batch_size; ++b) {
    const Tensor& f = clip.frames[static_cast<size_t>(start_frame + b)];
    std::copy(f.data.begin(), f.data.end(),
              batch.frames.data.begin() + static_cast<size_t>(b) * f.data.size());
    const double* src =
        clip.audio.data() + static_cast<size_t>(start_frame + b) * static_cast<size_t>(s);
    std::copy(src, src + s,
              batch.chunks.data.begin() + static_cast<size_t>(b) * static_cast<size_t>(s));
  }
  {
    std::span<const double> first(batch.chunks.data.data(), static_cast<size_t>(s));
    Spectrogram probe = stft_chunk(first, stft_window, stft_hop);
    pack_spectrogram(probe, static_cast<int>(h / 4), static_cast<int>(w / 4),
                     &batch.layout);
  }
  return batch;
}

ObjectiveParts build_objective(const CmwModel& model, const BatchData& batch,
                               const LossWeights& weights,
                               const std::vector<Tensor>& masks,
                               const Tensor& queue_snapshot, bool quantize) {
  int64_t b = batch.frames.dim(0);
  int64_t h = batch.frames.dim(2), w = batch.frames.dim(3);
  int64_t h4 = h / 4, w4 = w / 4;
  int s = static_cast<int>(batch.chunks.dim(1));
  if (static_cast<int64_t>(masks.size()) != b)
    throw DimensionError("build_objective: one mask per batch sample required");

  ag::VarPtr i_org = ag::constant(batch.frames);

  // packed audio planes for the whole batch
  Tensor planes({b, 1, h4, w4});
  for (int64_t n = 0; n < b; ++n) {
    std::span<const double> chunk(
        batch.chunks.data.data() + static_cast<size_t>(n * s),
        static_cast<size_t>(s));
    Spectrogram spec = stft_chunk(chunk, batch.layout.window_size,
                                  batch.layout.hop_length);
    Tensor plane = pack_spectrogram(spec, static_cast<int>(h4),
                                    static_cast<int>(w4), nullptr);
    std::copy(plane.data.begin(), plane.data.end(),
              planes.data.begin() + static_cast<size_t>(n) * plane.data.size());
  }

  ag::VarPtr vis1 = ag::haar_squeeze_op(ag::haar_squeeze_op(i_org));
  ag::VarPtr aud1 = ag::constant(planes);
  auto [vis_l, aud_l] = model.stack_forward(vis1, aud1);

  ag::VarPtr wm = ag::haar_unsqueeze_op(ag::haar_unsqueeze_op(vis_l));
  wm = ag::clamp01_ste(wm);
  if (quantize) wm = ag::quantize8_ste(wm);

  ag::VarPtr wl = ag::mse(wm, i_org);

  // masked blend: constant term M . I_org plus (1-M) . I_wm
  Tensor m_term({b, 3, h, w});
  Tensor one_minus({b, 3, h, w});
  int64_t plane_sz = h * w;
  for (int64_t n = 0; n < b; ++n) {
    const Tensor& mask = masks[static_cast<size_t>(n)];
    for (int64_t c = 0; c < 3; ++c)
      for (int64_t i = 0; i < plane_sz; ++i) {
        double m = mask.data[static_cast<size_t>(i)];
        size_t idx = static_cast<size_t>(((n * 3) + c) * plane_sz + i);
        m_term.data[idx] = m * batch.frames.data[idx];
        one_minus.data[idx] = 1.0 - m;
      }
  }
  ag::VarPtr masked =
      ag::add(ag::constant(std::move(m_term)),
              ag::mul(ag::constant(std::move(one_minus)), wm));

  ag::VarPtr vis_wm = ag::haar_squeeze_op(ag::haar_squeeze_op(masked));
  ag::VarPtr aud_hat = model.estimator.forward(vis_wm);
  auto [vis1_hat, aud1_hat] = model.stack_inverse(vis_wm, aud_hat);

  ag::VarPtr i_rec = ag::haar_unsqueeze_op(ag::haar_unsqueeze_op(vis1_hat));
  ag::VarPtr vrl = ag::mse(i_org, i_rec);

  ag::VarPtr a_rec = ag::istft_op(aud1_hat, batch.layout, s);
  ag::VarPtr a_org = ag::constant(batch.chunks);
  ag::VarPtr arl = ag::mse(a_org, a_rec);

  // the feature extractor shares the packing STFT settings
  ag::VarPtr f_org = model.sfe.forward(ag::stft_logmag_op(
      a_org, batch.layout.window_size, batch.layout.hop_length));
  ag::VarPtr f_rec = model.sfe.forward(ag::stft_logmag_op(
      a_rec, batch.layout.window_size, batch.layout.hop_length));
  ag::VarPtr sfcl = ag::info_nce(f_org, f_rec, queue_snapshot, weights.tau);

  ag::VarPtr total =
      ag::add(ag::add(ag::scale(wl, weights.lambda_wl),
                      ag::scale(vrl, weights.lambda_vrl)),
              ag::add(ag::scale(arl, weights.lambda_arl),
                      ag::scale(sfcl, weights.lambda_sfcl)));
  return {total, wl, vrl, arl, sfcl, f_rec};
}

StepBreakdown train_step(const CmwModel& model, const BatchData& batch,
                         const LossWeights& weights,
                         const std::vector<Tensor>& masks, FeatureQueue& queue,
                         Adam& optimizer, bool quantize) {
  Tensor snap = queue.snapshot();
  ObjectiveParts parts =
      build_objective(model, batch, weights, masks, snap, quantize);

  StepBreakdown out;
  out.wl = parts.wl->value.data[0];
  out.vrl = parts.vrl->value.data[0];
  out.arl = parts.arl->value.data[0];
  out.sfcl = parts.sfcl->value.data[0];
  out.total = parts.total->value.data[0];
  const char* names[4] = {"watermarking", "visual-reconstruction",
                          "audio-reconstruction", "feature-contrastive"};
  double vals[4] = {out.wl, out.vrl, out.arl, out.sfcl};
  for (int i = 0; i < 4; ++i)
    if (!std::isfinite(vals[i]))
      throw NumericError(std::string("non-finite loss in the ") + names[i] +
                         " term");

  Tensor f_rec = parts.f_rec->value;  // keep before backward frees it
  auto params = model.params();
  ag::zero_grad(params);
  ag::backward(parts.total);
  optimizer.step(params);
  queue.push_rows(f_rec);
  return out;
}

ValidationResult validate_model(const CmwModel& model,
                                const std::vector<AVStream>& val_clips,
                                const TamperPlan& eval_plan, uint64_t seed) {
  if (val_clips.empty()) throw DimensionError("validate_model: no clips");
  auto stack = model.stack_weights<double>();
  auto estimator = model.estimator_weights<double>();
  auto sfe = model.sfe_weights<double>();
  const ModelHyper& hp = model.hyper;

  ValidationResult out;
  struct ScoredClip {
    std::vector<double> scores;
    std::vector<TamperInterval> truth;
    double dt;
  };
  std::vector<ScoredClip> scored;
  double snr_sum = 0, psnr_sum = 0, ssim_sum = 0, tam_snr_sum = 0;
  double auc_sum = 0, ap_sum = 0, raw_ap_sum = 0;

  for (size_t ci = 0; ci < val_clips.size(); ++ci) {
    const AVStream& clip = val_clips[ci];
    EmbedOptions opts;
    EmbedResult emb = embed(clip, stack, hp.stft_window, hp.stft_hop, opts);

    double p = 0, si = 0;
    for (size_t i = 0; i < clip.frames.size(); ++i) {
      p += psnr_db(clip.frames[i], emb.frames[i]);
      si += ssim(clip.frames[i], emb.frames[i]);
    }
    psnr_sum += p / static_cast<double>(clip.frames.size());
    ssim_sum += si / static_cast<double>(clip.frames.size());

    RecoverResult clean =
        recover(emb.frames, stack, estimator, emb.layout, clip.chunk_samples());
    snr_sum += snr_db(clip.audio, clean.audio);

    AVStream wm_stream{emb.frames, clip.audio, clip.fps, clip.sample_rate};
    TamperPlan plan = eval_plan;
    plan.seed = mix64(seed ^ (0x51ED + ci));
    const AVStream& donor_clip = val_clips[(ci + 1) % val_clips.size()];
    std::vector<double> donor = donor_clip.audio;
    if (val_clips.size() == 1) std::reverse(donor.begin(), donor.end());
    auto [tampered, gt] = apply_plan(wm_stream, plan, donor, &clip.frames);

    RecoverResult rec = recover(tampered.frames, stack, estimator, emb.layout,
                                clip.chunk_samples());
    tam_snr_sum += snr_db(clip.audio, rec.audio);

    double dt = 1.0 / clip.fps;
    FeatureMap f_tam = extract_features(tampered.audio, sfe, clip.chunk_samples(),
                                        hp.stft_window, hp.stft_hop, dt);
    FeatureMap f_rec = extract_features(rec.audio, sfe, clip.chunk_samples(),
                                        hp.stft_window, hp.stft_hop, dt);
    TamperScoreSeries series = similarity_scores(f_tam, f_rec);

    int t_len = static_cast<int>(series.scores.size());
    std::vector<int> labels = interval_labels(gt.audio_intervals, t_len, dt);
    std::vector<double> likelihood(series.scores.size());
    for (size_t i = 0; i < series.scores.size(); ++i)
      likelihood[i] = -series.scores[i];
    auc_sum += auc_score(likelihood, labels);
    ap_sum += average_precision(likelihood, labels);

    TamperScoreSeries raw =
        raw_waveform_scores(tampered.audio, rec.audio, clip.chunk_samples(), dt);
    std::vector<double> raw_like(raw.scores.size());
    for (size_t i = 0; i < raw.scores.size(); ++i) raw_like[i] = -raw.scores[i];
    raw_ap_sum += average_precision(raw_like, labels);

    scored.push_back({series.scores, gt.audio_intervals, dt});
  }

  double n = static_cast<double>(val_clips.size());
  out.recovery_snr = snr_sum / n;
  out.psnr = psnr_sum / n;
  out.ssim = ssim_sum / n;
  out.tampered_snr = tam_snr_sum / n;
  out.auc = auc_sum / n;
  out.ap = ap_sum / n;
  out.raw_ap = raw_ap_sum / n;

  // decision threshold: sweep a fixed grid, keep the best mean interval IoU
  double best_iou = -1.0, best_th = 0.5;
  for (int k = 1; k < 200; ++k) {
    double th = -1.0 + 2.0 * k / 200.0;
    double iou_sum = 0;
    for (const auto& sc : scored) {
      TamperScoreSeries series{sc.scores, sc.dt};
      iou_sum += interval_iou(scores_to_intervals(series, th), sc.truth);
    }
    double mean_iou = iou_sum / n;
    if (mean_iou > best_iou) {
      best_iou = mean_iou;
      best_th = th;
    }
  }
  out.iou = best_iou;
  out.best_threshold = best_th;
  return out;
}

namespace {

std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void rng_from_string(Rng& rng, const std::string& s) {
  std::istringstream is(s);
  is >> rng;
}

void save_train_state(const std::filesystem::path& path, int iter,
                      const Adam& adam, const FeatureQueue& queue,
                      const Rng& data_rng, const Rng& mask_rng) {
  TensorMapFile f;
  f.manifest = {{"kind", "train-state"},
                {"iter", iter},
                {"adam_t", adam.t()},
                {"queue_size", queue.size()},
                {"queue_head", queue.head()},
                {"data_rng", rng_to_string(data_rng)},
                {"mask_rng", rng_to_string(mask_rng)}};
  int idx = 0;
  for (const Tensor& t : adam.state_tensors())
    f.tensors.emplace_back("adam." + std::to_string(idx++), t);
  f.tensors.emplace_back("queue.storage", queue.serialize_storage());
  write_tensor_map(path, f);
}

}  // namespace

TrainOutcome train(CmwModel& model, const std::vector<AVStream>& train_clips,
                   const std::vector<AVStream>& val_clips,
                   const TrainConfig& cfg, const LossWeights& weights,
                   const MaskSpec& mask_spec, const TamperPlan& eval_plan,
                   const std::filesystem::path& checkpoint_path,
                   const std::filesystem::path& log_path, bool resume,
                   const ProgressFn& progress) {
  if (train_clips.empty()) throw ConfigError("train: empty dataset");
  for (const AVStream& clip : train_clips) {
    validate_stream(clip);
    if (clip.frame_height() != model.hyper.frame_height ||
        clip.frame_width() != model.hyper.frame_width ||
        clip.fps != model.hyper.fps ||
        clip.sample_rate != model.hyper.sample_rate)
      throw ConfigError("train: clip geometry differs from the model's");
    int needed = packed_slot_count(clip.chunk_samples(), model.hyper.stft_window,
                                   model.hyper.stft_hop);
    int64_t slots = (clip.frame_height() / 4) * (clip.frame_width() / 4);
    if (needed > slots)
      throw CapacityError("train: packed spectrogram needs " +
                          std::to_string(needed) + " slots, frames offer " +
                          std::to_string(slots));
    if (static_cast<int>(clip.frames.size()) < cfg.batch_size)
      throw ConfigError("train: clip shorter than one batch");
  }

  Adam adam(cfg.learning_rate, cfg.beta1, cfg.beta2);
  FeatureQueue queue(cfg.queue_capacity, model.hyper.feature_channels);
  Rng data_rng = make_rng(cfg.seed, 1);
  Rng mask_rng = make_rng(cfg.seed, 2);
  int start_iter = 0;

  std::filesystem::path state_path = checkpoint_path;
  state_path += ".state";

  if (resume && std::filesystem::exists(checkpoint_path) &&
      std::filesystem::exists(state_path)) {
    CmwModel loaded = load_checkpoint(checkpoint_path);
    auto want = model.named_params();
    auto got = loaded.named_params();
    if (want.size() != got.size())
      throw ModelMismatchError("resume: checkpoint does not match the model");
    for (size_t i = 0; i < want.size(); ++i)
      want[i].second->value = got[i].second->value;
    model.hyper = loaded.hyper;

    TensorMapFile f = read_tensor_map(state_path);
    if (f.manifest.at("kind") != "train-state")
      throw ContainerError("not a train-state file: " + state_path.string());
    start_iter = f.manifest.at("iter").get<int>();
    rng_from_string(data_rng, f.manifest.at("data_rng").get<std::string>());
    rng_from_string(mask_rng, f.manifest.at("mask_rng").get<std::string>());
    std::vector<Tensor> adam_state;
    Tensor queue_storage;
    for (auto& [name, t] : f.tensors) {
      if (name.rfind("adam.", 0) == 0)
        adam_state.push_back(std::move(t));
      else if (name == "queue.storage")
        queue_storage = std::move(t);
    }
    adam.restore(std::move(adam_state), f.manifest.at("adam_t").get<int64_t>());
    queue.restore(queue_storage, f.manifest.at("queue_size").get<int64_t>(),
                  f.manifest.at("queue_head").get<int64_t>());
  }

  std::ofstream log(log_path, std::ios::app);
  if (!log) throw ContainerError("cannot open metrics log: " + log_path.string());

  int h = static_cast<int>(train_clips[0].frame_height());
  int w = static_cast<int>(train_clips[0].frame_width());

  TrainOutcome outcome;
  for (int iter = start_iter + 1; iter <= cfg.iterations; ++iter) {
    size_t clip_idx = std::uniform_int_distribution<size_t>(
        0, train_clips.size() - 1)(data_rng);
    const AVStream& clip = train_clips[clip_idx];
    int start = std::uniform_int_distribution<int>(
        0, static_cast<int>(clip.frames.size()) - cfg.batch_size)(data_rng);
    BatchData batch = make_batch(clip, start, cfg.batch_size,
                                 model.hyper.stft_window, model.hyper.stft_hop);
    std::vector<Tensor> masks;
    masks.reserve(static_cast<size_t>(cfg.batch_size));
    for (int b = 0; b < cfg.batch_size; ++b)
      masks.push_back(gen_mask(mask_spec, h, w, mask_rng));

    StepBreakdown step =
        train_step(model, batch, weights, masks, queue, adam, cfg.quantize);
    if (progress) progress(iter, step);

    if (iter % cfg.log_interval == 0 || iter == 1 || iter == cfg.iterations) {
      nlohmann::json line = {{"iter", iter},     {"total", step.total},
                             {"wl", step.wl},    {"vrl", step.vrl},
                             {"arl", step.arl},  {"sfcl", step.sfcl}};
      log << line.dump() << "\n";
      log.flush();
    }

    bool last = iter == cfg.iterations;
    if (!val_clips.empty() &&
        (iter % cfg.validation_interval == 0 || last)) {
      ValidationResult v =
          validate_model(model, val_clips, eval_plan, mix64(cfg.seed ^ iter));
      model.hyper.localize_threshold = v.best_threshold;
      outcome.final_validation = v;
      nlohmann::json line = {{"iter", iter},
                             {"val_snr", v.recovery_snr},
                             {"val_tampered_snr", v.tampered_snr},
                             {"val_psnr", v.psnr},
                             {"val_ssim", v.ssim},
                             {"val_auc", v.auc},
                             {"val_ap", v.ap},
                             {"val_raw_ap", v.raw_ap},
                             {"val_iou", v.iou},
                             {"val_threshold", v.best_threshold}};
      log << line.dump() << "\n";
      log.flush();
    }

    if (iter % cfg.checkpoint_interval == 0 || last) {
      save_checkpoint(checkpoint_path, model);
      save_train_state(state_path, iter, adam, queue, data_rng, mask_rng);
    }
    outcome.iterations_run = iter;
  }
  return outcome;
}

}  // namespace avguard
