// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "avguard/errors.hpp"
#include "avguard/transforms.hpp"

namespace avguard {

double snr_db(std::span<const double> ref, std::span<const double> est) {
  if (ref.size() != est.size())
    throw DimensionError("snr: signal lengths differ");
  double sig = 0.0, err = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    sig += ref[i] * ref[i];
    double d = ref[i] - est[i];
    err += d * d;
  }
  if (sig == 0.0) throw NumericError("snr: reference signal is identically zero");
  if (err == 0.0) return kDbCap;
  return std::min(kDbCap, 10.0 * std::log10(sig / err));
}

double psnr_db(const Tensor& ref, const Tensor& est) {
  if (!ref.same_shape(est)) throw DimensionError("psnr: shape mismatch");
  double mse = 0.0;
  for (size_t i = 0; i < ref.data.size(); ++i) {
    double d = ref.data[i] - est.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(ref.numel());
  if (mse == 0.0) return kDbCap;
  return std::min(kDbCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

std::vector<double> gaussian_kernel_11() {
  std::vector<double> k(11);
  double sum = 0.0;
  for (int i = 0; i < 11; ++i) {
    double d = i - 5.0;
    k[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += k[static_cast<size_t>(i)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// separable weighted local sums over valid positions: (H,W) -> (H-10,W-10)
std::vector<double> local_weighted(const double* img, int64_t h, int64_t w,
                                   const std::vector<double>& k) {
  int64_t hw = w - 10;
  std::vector<double> rows(static_cast<size_t>(h * hw), 0.0);
  for (int64_t i = 0; i < h; ++i)
    for (int64_t j = 0; j < hw; ++j) {
      double s = 0.0;
      for (int t = 0; t < 11; ++t) s += k[static_cast<size_t>(t)] * img[i * w + j + t];
      rows[static_cast<size_t>(i * hw + j)] = s;
    }
  int64_t hh = h - 10;
  std::vector<double> out(static_cast<size_t>(hh * hw), 0.0);
  for (int64_t i = 0; i < hh; ++i)
    for (int64_t j = 0; j < hw; ++j) {
      double s = 0.0;
      for (int t = 0; t < 11; ++t)
        s += k[static_cast<size_t>(t)] * rows[static_cast<size_t>((i + t) * hw + j)];
      out[static_cast<size_t>(i * hw + j)] = s;
    }
  return out;
}

}  // namespace

double ssim(const Tensor& ref, const Tensor& est) {
  if (!ref.same_shape(est)) throw DimensionError("ssim: shape mismatch");
  if (ref.ndim() != 3) throw DimensionError("ssim expects (C,H,W)");
  int64_t c = ref.dim(0), h = ref.dim(1), w = ref.dim(2);
  if (h < 11 || w < 11) throw DimensionError("ssim: frame smaller than the window");
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  std::vector<double> k = gaussian_kernel_11();

  double total = 0.0;
  int64_t count = 0;
  std::vector<double> xy(static_cast<size_t>(h * w)), xx(xy.size()), yy(xy.size());
  for (int64_t ci = 0; ci < c; ++ci) {
    const double* x = &ref.data[static_cast<size_t>(ci * h * w)];
    const double* y = &est.data[static_cast<size_t>(ci * h * w)];
    for (int64_t i = 0; i < h * w; ++i) {
      xx[static_cast<size_t>(i)] = x[i] * x[i];
      yy[static_cast<size_t>(i)] = y[i] * y[i];
      xy[static_cast<size_t>(i)] = x[i] * y[i];
    }
    std::vector<double> mx = local_weighted(x, h, w, k);
    std::vector<double> my = local_weighted(y, h, w, k);
    std::vector<double> mxx = local_weighted(xx.data(), h, w, k);
    std::vector<double> myy = local_weighted(yy.data(), h, w, k);
    std::vector<double> mxy = local_weighted(xy.data(), h, w, k);
    for (size_t i = 0; i < mx.size(); ++i) {
      double vx = mxx[i] - mx[i] * mx[i];
      double vy = myy[i] - my[i] * my[i];
      double cxy = mxy[i] - mx[i] * my[i];
      double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2);
      double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

namespace {

std::vector<TamperInterval> merge_intervals(std::vector<TamperInterval> xs) {
  for (const auto& x : xs)
    if (!(x.t_start < x.t_end))
      throw DimensionError("interval with t_start >= t_end");
  std::sort(xs.begin(), xs.end(), [](const TamperInterval& a, const TamperInterval& b) {
    return a.t_start < b.t_start;
  });
  std::vector<TamperInterval> out;
  for (const auto& x : xs) {
    if (!out.empty() && x.t_start <= out.back().t_end)
      out.back().t_end = std::max(out.back().t_end, x.t_end);
    else
      out.push_back(x);
  }
  return out;
}

double total_length(const std::vector<TamperInterval>& xs) {
  double s = 0.0;
  for (const auto& x : xs) s += x.t_end - x.t_start;
  return s;
}

double intersection_length(const std::vector<TamperInterval>& a,
                           const std::vector<TamperInterval>& b) {
  double s = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double lo = std::max(a[i].t_start, b[j].t_start);
    double hi = std::min(a[i].t_end, b[j].t_end);
    if (hi > lo) s += hi - lo;
    if (a[i].t_end < b[j].t_end)
      ++i;
    else
      ++j;
  }
  return s;
}

}  // namespace

double interval_iou(std::vector<TamperInterval> predicted,
                    std::vector<TamperInterval> truth) {
  std::vector<TamperInterval> a = merge_intervals(std::move(predicted));
  std::vector<TamperInterval> b = merge_intervals(std::move(truth));
  if (a.empty() && b.empty()) return 1.0;
  double inter = intersection_length(a, b);
  double uni = total_length(a) + total_length(b) - inter;
  return uni == 0.0 ? 1.0 : inter / uni;
}

double average_precision(std::span<const double> scores,
                         std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw DimensionError("average_precision: length mismatch");
  if (scores.empty()) throw DimensionError("average_precision: empty input");
  int64_t n_pos = 0;
  for (int l : labels) n_pos += l;
  if (n_pos == 0) return 0.0;

  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  // ties form one threshold group; precision is evaluated after the group
  double ap = 0.0;
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    int64_t tp_gain = 0, fp_gain = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]])
        ++tp_gain;
      else
        ++fp_gain;
      ++j;
    }
    tp += tp_gain;
    fp += fp_gain;
    double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    double recall_gain = static_cast<double>(tp_gain) / static_cast<double>(n_pos);
    ap += precision * recall_gain;
    i = j;
  }
  return ap;
}

double auc_score(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: length mismatch");
  int64_t n_pos = 0;
  for (int l : labels) n_pos += l;
  int64_t n_neg = static_cast<int64_t>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw NumericError("auc undefined: both classes must be present");

  // rank-sum with average ranks for ties
  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (size_t k = i; k < j; ++k)
      if (labels[idx[k]]) rank_sum_pos += avg_rank;
    i = j;
  }
  double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double log_spectral_distance(std::span<const double> ref,
                             std::span<const double> est, int window_size,
                             int hop_length) {
  if (ref.size() != est.size())
    throw DimensionError("log_spectral_distance: length mismatch");
  Spectrogram a = stft_chunk(ref, window_size, hop_length);
  Spectrogram b = stft_chunk(est, window_size, hop_length);
  double acc = 0.0;
  int64_t count = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double la = std::max(20.0 * std::log10(std::abs(a.data[i])), -80.0);
    double lb = std::max(20.0 * std::log10(std::abs(b.data[i])), -80.0);
    double d = la - lb;
    acc += d * d;
    ++count;
  }
  return std::sqrt(acc / static_cast<double>(count));
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("snr_db", snr_db);
  put("lsd", lsd);
  put("psnr_db", psnr_db);
  put("ssim", ssim);
  put("iou", iou);
  put("ap", ap);
  put("auc", auc);
  return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  MetricReport r;
  auto get = [&](const char* key) -> std::optional<double> {
    if (j.contains(key)) return j.at(key).get<double>();
    return std::nullopt;
  };
  r.snr_db = get("snr_db");
  r.lsd = get("lsd");
  r.psnr_db = get("psnr_db");
  r.ssim = get("ssim");
  r.iou = get("iou");
  r.ap = get("ap");
  r.auc = get("auc");
  return r;
}

}  // namespace avguard
