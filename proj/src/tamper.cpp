// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/tamper.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "avguard/errors.hpp"

namespace avguard {

namespace {
constexpr double kPi = 3.14159265358979323846;

double rms(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

// crossfades donor content into [start, start+len) of audio, ramps inside
// the interval so everything outside stays bit-identical
void splice_with_crossfade(std::vector<double>& audio, int64_t start,
                           std::span<const double> patch, int fade) {
  int64_t len = static_cast<int64_t>(patch.size());
  for (int64_t i = 0; i < len; ++i) {
    double alpha = 1.0;
    if (i < fade) alpha = static_cast<double>(i + 1) / (fade + 1);
    int64_t from_end = len - 1 - i;
    if (from_end < fade)
      alpha = std::min(alpha, static_cast<double>(from_end + 1) / (fade + 1));
    double orig = audio[static_cast<size_t>(start + i)];
    audio[static_cast<size_t>(start + i)] =
        (1.0 - alpha) * orig + alpha * patch[static_cast<size_t>(i)];
  }
}

std::pair<int64_t, int64_t> pick_segment(const AVStream& stream, double fraction,
                                         Rng& rng) {
  int64_t n = static_cast<int64_t>(stream.audio.size());
  int64_t len = static_cast<int64_t>(std::llround(fraction * static_cast<double>(n)));
  len = std::clamp<int64_t>(len, 1, n);
  int64_t start =
      std::uniform_int_distribution<int64_t>(0, n - len)(rng);
  return {start, len};
}

GroundTruth audio_ground_truth(const AVStream& stream, int64_t start, int64_t len) {
  GroundTruth gt;
  double sr = stream.sample_rate;
  gt.audio_intervals.push_back({static_cast<double>(start) / sr,
                                static_cast<double>(start + len) / sr});
  return gt;
}

}  // namespace

void validate_plan(const TamperPlan& plan) {
  if (plan.audio_mode != TamperPlan::AudioMode::kNone &&
      (plan.fraction < 0.10 || plan.fraction > 0.30))
    throw ConfigError("tamper fraction must lie in [0.10, 0.30], got " +
                      std::to_string(plan.fraction));
}

std::pair<AVStream, GroundTruth> swap_audio(const AVStream& stream,
                                            double fraction,
                                            std::span<const double> donor,
                                            Rng& rng) {
  if (fraction < 0.10 || fraction > 0.30)
    throw ConfigError("swap fraction must lie in [0.10, 0.30]");
  AVStream out = stream;
  auto [start, len] = pick_segment(stream, fraction, rng);
  if (static_cast<int64_t>(donor.size()) < len)
    throw DimensionError("donor audio shorter than the swap segment (" +
                         std::to_string(donor.size()) + " < " +
                         std::to_string(len) + ")");
  int64_t donor_start = std::uniform_int_distribution<int64_t>(
      0, static_cast<int64_t>(donor.size()) - len)(rng);
  int fade = std::max(1, static_cast<int>(std::lround(
                             kCrossfadeSeconds * stream.sample_rate)));
  splice_with_crossfade(out.audio, start,
                        donor.subspan(static_cast<size_t>(donor_start),
                                      static_cast<size_t>(len)),
                        fade);
  return {std::move(out), audio_ground_truth(stream, start, len)};
}

std::pair<AVStream, GroundTruth> substitute_audio(const AVStream& stream,
                                                  double fraction,
                                                  TamperPlan::Generator gen,
                                                  Rng& rng) {
  if (fraction < 0.10 || fraction > 0.30)
    throw ConfigError("substitute fraction must lie in [0.10, 0.30]");
  AVStream out = stream;
  auto [start, len] = pick_segment(stream, fraction, rng);

  std::span<const double> orig(stream.audio.data() + start,
                               static_cast<size_t>(len));
  std::vector<double> patch(static_cast<size_t>(len), 0.0);
  switch (gen) {
    case TamperPlan::Generator::kNoise: {
      std::normal_distribution<double> d(0.0, 1.0);
      for (auto& v : patch) v = d(rng);
      break;
    }
    case TamperPlan::Generator::kTone: {
      double freq = std::min(440.0, 0.4 * stream.sample_rate);
      double phase = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng);
      for (int64_t i = 0; i < len; ++i)
        patch[static_cast<size_t>(i)] =
            std::sin(2.0 * kPi * freq * i / stream.sample_rate + phase);
      break;
    }
    case TamperPlan::Generator::kShuffle: {
      // permute 50 ms blocks of the displaced segment
      int64_t block = std::max<int64_t>(1, stream.sample_rate / 20);
      int64_t n_blocks = (len + block - 1) / block;
      std::vector<int64_t> order(static_cast<size_t>(n_blocks));
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (int64_t bi = 0; bi < n_blocks; ++bi) {
        int64_t src = order[static_cast<size_t>(bi)] * block;
        int64_t dst = bi * block;
        for (int64_t i = 0; i < block && dst + i < len; ++i)
          patch[static_cast<size_t>(dst + i)] =
              orig[static_cast<size_t>((src + i) % len)];
      }
      break;
    }
  }
  double target = rms(orig);
  double got = rms(patch);
  double scale = got > 0.0 ? target / got : 0.0;
  for (auto& v : patch) v *= scale;

  int fade = std::max(1, static_cast<int>(std::lround(
                             kCrossfadeSeconds * stream.sample_rate)));
  splice_with_crossfade(out.audio, start, patch, fade);
  return {std::move(out), audio_ground_truth(stream, start, len)};
}

void tamper_frames(std::vector<Tensor>& frames, const std::vector<int>& indices,
                   TamperPlan::VisualMode mode, int box_x, int box_y, int box_w,
                   int box_h, const std::vector<Tensor>* originals, Rng& rng) {
  if (mode == TamperPlan::VisualMode::kNone || indices.empty()) return;
  if (frames.empty()) return;
  int64_t h = frames[0].dim(1), w = frames[0].dim(2);
  if (box_w <= 0 || box_h <= 0) {
    box_w = static_cast<int>(w / 3);
    box_h = static_cast<int>(h / 3);
    box_x = static_cast<int>((w - box_w) / 2);
    box_y = static_cast<int>((h - box_h) / 2);
  }
  if (box_x < 0 || box_y < 0 || box_x + box_w > w || box_y + box_h > h)
    throw DimensionError("tamper_frames: box out of frame bounds");

  std::normal_distribution<double> noise(0.0, 0.05);
  for (int idx : indices) {
    if (idx < 0 || idx >= static_cast<int>(frames.size()))
      throw DimensionError("tamper_frames: frame index out of range");
    Tensor& f = frames[static_cast<size_t>(idx)];
    switch (mode) {
      case TamperPlan::VisualMode::kRegionReplace:
        if (originals) {
          const Tensor& o = (*originals)[static_cast<size_t>(idx)];
          for (int64_t c = 0; c < 3; ++c)
            for (int64_t i = box_y; i < box_y + box_h; ++i)
              for (int64_t j = box_x; j < box_x + box_w; ++j)
                f.at3(c, i, j) = o.at3(c, i, j);
        } else {
          // no clean source: flatten the region with a 5x5 box blur
          Tensor blurred = f;
          for (int64_t c = 0; c < 3; ++c)
            for (int64_t i = box_y; i < box_y + box_h; ++i)
              for (int64_t j = box_x; j < box_x + box_w; ++j) {
                double s = 0.0;
                int cnt = 0;
                for (int di = -2; di <= 2; ++di)
                  for (int dj = -2; dj <= 2; ++dj) {
                    int64_t ii = i + di, jj = j + dj;
                    if (ii >= 0 && ii < h && jj >= 0 && jj < w) {
                      s += f.at3(c, ii, jj);
                      ++cnt;
                    }
                  }
                blurred.at3(c, i, j) = s / cnt;
              }
          f = std::move(blurred);
        }
        break;
      case TamperPlan::VisualMode::kRegionNoise:
        for (int64_t c = 0; c < 3; ++c)
          for (int64_t i = box_y; i < box_y + box_h; ++i)
            for (int64_t j = box_x; j < box_x + box_w; ++j)
              f.at3(c, i, j) = std::clamp(f.at3(c, i, j) + noise(rng), 0.0, 1.0);
        break;
      case TamperPlan::VisualMode::kNone:
        break;
    }
  }
}

std::pair<AVStream, GroundTruth> apply_plan(const AVStream& stream,
                                            const TamperPlan& plan,
                                            std::span<const double> donor,
                                            const std::vector<Tensor>* original_frames) {
  validate_plan(plan);
  Rng rng = make_rng(plan.seed, 0xA77);
  AVStream out = stream;
  GroundTruth gt;

  switch (plan.audio_mode) {
    case TamperPlan::AudioMode::kNone:
      break;
    case TamperPlan::AudioMode::kSwap: {
      auto [tampered, truth] = swap_audio(out, plan.fraction, donor, rng);
      out = std::move(tampered);
      gt = std::move(truth);
      break;
    }
    case TamperPlan::AudioMode::kSubstitute: {
      auto [tampered, truth] =
          substitute_audio(out, plan.fraction, plan.generator, rng);
      out = std::move(tampered);
      gt = std::move(truth);
      break;
    }
  }

  if (plan.visual_mode != TamperPlan::VisualMode::kNone) {
    std::vector<int> indices;
    if (plan.visual_all_frames) {
      indices.resize(out.frames.size());
      std::iota(indices.begin(), indices.end(), 0);
    } else {
      double dt = 1.0 / out.fps;
      for (size_t i = 0; i < out.frames.size(); ++i) {
        double lo = static_cast<double>(i) * dt, hi = lo + dt;
        for (const auto& iv : gt.audio_intervals)
          if (std::min(hi, iv.t_end) > std::max(lo, iv.t_start)) {
            indices.push_back(static_cast<int>(i));
            break;
          }
      }
    }
    tamper_frames(out.frames, indices, plan.visual_mode, plan.box_x, plan.box_y,
                  plan.box_w, plan.box_h, original_frames, rng);
    gt.tampered_frame_indices = std::move(indices);
  }
  return {std::move(out), std::move(gt)};
}

std::vector<int> interval_labels(const std::vector<TamperInterval>& intervals,
                                 int n_timesteps, double timestep_duration,
                                 double min_overlap) {
  std::vector<int> labels(static_cast<size_t>(n_timesteps), 0);
  for (int t = 0; t < n_timesteps; ++t) {
    double lo = t * timestep_duration, hi = lo + timestep_duration;
    double covered = 0.0;
    for (const auto& iv : intervals)
      covered += std::max(0.0, std::min(hi, iv.t_end) - std::max(lo, iv.t_start));
    if (covered >= min_overlap * timestep_duration) labels[static_cast<size_t>(t)] = 1;
  }
  return labels;
}

nlohmann::json GroundTruth::to_json() const {
  nlohmann::json j;
  nlohmann::json iv = nlohmann::json::array();
  for (const auto& x : audio_intervals) iv.push_back({x.t_start, x.t_end});
  j["audio_intervals"] = iv;
  j["tampered_frame_indices"] = tampered_frame_indices;
  return j;
}

GroundTruth GroundTruth::from_json(const nlohmann::json& j) {
  GroundTruth gt;
  for (const auto& iv : j.at("audio_intervals"))
    gt.audio_intervals.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
  gt.tampered_frame_indices =
      j.at("tampered_frame_indices").get<std::vector<int>>();
  return gt;
}

void GroundTruth::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw ContainerError("cannot write ground truth: " + path.string());
  os << to_json().dump(2) << "\n";
}

GroundTruth GroundTruth::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ContainerError("cannot read ground truth: " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(std::string("bad ground truth JSON: ") + e.what());
  }
  return from_json(j);
}

}  // namespace avguard
