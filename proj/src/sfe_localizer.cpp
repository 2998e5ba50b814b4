// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/sfe_localizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "avguard/errors.hpp"
#include "avguard/transforms.hpp"

namespace avguard {

FeatureMap extract_features(std::span<const double> audio,
                            const SfeWeights<double>& sfe, int chunk_samples,
                            int stft_window, int stft_hop,
                            double timestep_duration) {
  if (audio.empty()) throw DimensionError("extract_features: empty audio");
  if (chunk_samples <= 0 || audio.size() % static_cast<size_t>(chunk_samples) != 0)
    throw DimensionError("extract_features: audio length must be a multiple of "
                         "the chunk size");
  int64_t t_len = static_cast<int64_t>(audio.size()) / chunk_samples;
  int64_t c = sfe.proj_w.dim(1);
  FeatureMap map;
  map.timestep_duration = timestep_duration;
  map.features = Tensor({t_len, c});
  for (int64_t t = 0; t < t_len; ++t) {
    std::span<const double> chunk(audio.data() + t * chunk_samples,
                                  static_cast<size_t>(chunk_samples));
    Tensor logmag = stft_logmag(chunk, stft_window, stft_hop);
    std::vector<double> feat = sfe_eval(sfe, logmag);
    std::copy(feat.begin(), feat.end(),
              map.features.data.begin() + static_cast<size_t>(t * c));
  }
  return map;
}

TamperScoreSeries similarity_scores(const FeatureMap& a, const FeatureMap& b,
                                    int median_width) {
  if (!a.features.same_shape(b.features))
    throw DimensionError("similarity_scores: feature map shapes differ");
  if (median_width < 1 || median_width % 2 == 0)
    throw DimensionError("similarity_scores: median width must be odd");
  int64_t t_len = a.features.dim(0), c = a.features.dim(1);
  std::vector<double> raw(static_cast<size_t>(t_len));
  for (int64_t t = 0; t < t_len; ++t) {
    double s = 0.0;
    const double* ra = &a.features.data[static_cast<size_t>(t * c)];
    const double* rb = &b.features.data[static_cast<size_t>(t * c)];
    for (int64_t i = 0; i < c; ++i) s += ra[i] * rb[i];
    raw[static_cast<size_t>(t)] = s;
  }

  TamperScoreSeries series;
  series.timestep_duration = a.timestep_duration;
  series.scores.resize(raw.size());
  int half = median_width / 2;
  std::vector<double> window(static_cast<size_t>(median_width));
  for (int64_t t = 0; t < t_len; ++t) {
    for (int k = -half; k <= half; ++k) {
      int64_t idx = std::clamp<int64_t>(t + k, 0, t_len - 1);  // replicate edges
      window[static_cast<size_t>(k + half)] = raw[static_cast<size_t>(idx)];
    }
    std::nth_element(window.begin(), window.begin() + half, window.end());
    series.scores[static_cast<size_t>(t)] = window[static_cast<size_t>(half)];
  }
  return series;
}

std::vector<TamperInterval> scores_to_intervals(const TamperScoreSeries& series,
                                                double threshold, int min_run) {
  std::vector<TamperInterval> out;
  int64_t t_len = static_cast<int64_t>(series.scores.size());
  int64_t run_start = -1;
  for (int64_t t = 0; t <= t_len; ++t) {
    bool tampered = t < t_len && series.scores[static_cast<size_t>(t)] < threshold;
    if (tampered && run_start < 0) run_start = t;
    if (!tampered && run_start >= 0) {
      if (t - run_start >= min_run)
        out.push_back({run_start * series.timestep_duration,
                       t * series.timestep_duration});
      run_start = -1;
    }
  }
  return out;
}

TamperScoreSeries raw_waveform_scores(std::span<const double> a,
                                      std::span<const double> b,
                                      int chunk_samples,
                                      double timestep_duration) {
  if (a.size() != b.size())
    throw DimensionError("raw_waveform_scores: length mismatch");
  if (chunk_samples <= 0 || a.size() % static_cast<size_t>(chunk_samples) != 0)
    throw DimensionError("raw_waveform_scores: length must be a multiple of "
                         "the chunk size");
  TamperScoreSeries series;
  series.timestep_duration = timestep_duration;
  size_t t_len = a.size() / static_cast<size_t>(chunk_samples);
  series.scores.resize(t_len);
  for (size_t t = 0; t < t_len; ++t) {
    double mse = 0.0;
    for (int i = 0; i < chunk_samples; ++i) {
      double d = a[t * static_cast<size_t>(chunk_samples) + static_cast<size_t>(i)] -
                 b[t * static_cast<size_t>(chunk_samples) + static_cast<size_t>(i)];
      mse += d * d;
    }
    mse /= chunk_samples;
    series.scores[t] = 1.0 / (1.0 + mse);
  }
  return series;
}

nlohmann::json TamperReport::to_json() const {
  nlohmann::json j;
  j["timestep_duration"] = scores.timestep_duration;
  j["scores"] = scores.scores;
  j["threshold"] = threshold;
  nlohmann::json iv = nlohmann::json::array();
  for (const auto& x : intervals) iv.push_back({x.t_start, x.t_end});
  j["intervals"] = iv;
  j["metrics"] = metrics.to_json();
  return j;
}

TamperReport TamperReport::from_json(const nlohmann::json& j) {
  TamperReport r;
  r.scores.timestep_duration = j.at("timestep_duration").get<double>();
  r.scores.scores = j.at("scores").get<std::vector<double>>();
  r.threshold = j.at("threshold").get<double>();
  for (const auto& iv : j.at("intervals"))
    r.intervals.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
  r.metrics = MetricReport::from_json(j.at("metrics"));
  return r;
}

void TamperReport::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw ContainerError("cannot write report: " + path.string());
  os << to_json().dump(2) << "\n";
}

TamperReport TamperReport::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ContainerError("cannot read report: " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(std::string("bad report JSON: ") + e.what());
  }
  return from_json(j);
}

}  // namespace avguard
