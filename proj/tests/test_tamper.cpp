// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "avguard/errors.hpp"
#include "avguard/rng.hpp"
#include "avguard/tamper.hpp"
#include "avguard/training.hpp"

using namespace avguard;

namespace {

AVStream make_stream(int n_frames, int fps, int sr, uint64_t seed) {
  AVStream s;
  s.fps = fps;
  s.sample_rate = sr;
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> d(-0.4, 0.4);
  for (int i = 0; i < n_frames; ++i) {
    Tensor f({3, 8, 8});
    for (auto& v : f.data) v = std::abs(d(rng));
    s.frames.push_back(std::move(f));
  }
  s.audio.resize(static_cast<size_t>(n_frames) * (sr / fps));
  for (auto& v : s.audio) v = d(rng);
  return s;
}

double rms_of(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace

TEST_CASE("fraction bounds are enforced") {
  AVStream s = make_stream(25, 25, 2000, 1);
  std::vector<double> donor(s.audio.size() * 2, 0.1);
  Rng rng = make_rng(2);
  CHECK_THROWS_AS(swap_audio(s, 0.05, donor, rng), ConfigError);
  CHECK_THROWS_AS(swap_audio(s, 0.35, donor, rng), ConfigError);
  CHECK_NOTHROW(swap_audio(s, 0.10, donor, rng));
  CHECK_NOTHROW(swap_audio(s, 0.30, donor, rng));

  TamperPlan plan;
  plan.fraction = 0.5;
  CHECK_THROWS_AS(validate_plan(plan), ConfigError);
}

TEST_CASE("swap replaces one contiguous fifth of a 5 s stream") {
  AVStream s = make_stream(125, 25, 2000, 3);  // 5 s
  std::vector<double> donor(s.audio.size(), 0.25);
  Rng rng = make_rng(4);
  auto [tampered, gt] = swap_audio(s, 0.2, donor, rng);
  REQUIRE(gt.audio_intervals.size() == 1);
  double len = gt.audio_intervals[0].t_end - gt.audio_intervals[0].t_start;
  CHECK(len == doctest::Approx(1.0));  // 0.2 * 5 s

  // outside the interval everything is bit identical
  int64_t start = static_cast<int64_t>(std::llround(gt.audio_intervals[0].t_start * 2000));
  int64_t end = static_cast<int64_t>(std::llround(gt.audio_intervals[0].t_end * 2000));
  for (int64_t i = 0; i < static_cast<int64_t>(s.audio.size()); ++i) {
    if (i < start || i >= end)
      CHECK(tampered.audio[static_cast<size_t>(i)] == s.audio[static_cast<size_t>(i)]);
  }
  // the interior (past the crossfade) carries donor content
  int fade = static_cast<int>(std::lround(kCrossfadeSeconds * 2000));
  bool differs = false;
  for (int64_t i = start + fade; i < end - fade; ++i)
    if (tampered.audio[static_cast<size_t>(i)] != s.audio[static_cast<size_t>(i)])
      differs = true;
  CHECK(differs);
}

TEST_CASE("ground truth matches the actually modified sample range") {
  AVStream s = make_stream(50, 25, 2000, 5);
  std::vector<double> donor(s.audio.size(), 0.3);
  Rng rng = make_rng(6);
  auto [tampered, gt] = swap_audio(s, 0.25, donor, rng);
  int64_t lo = static_cast<int64_t>(s.audio.size()), hi = -1;
  for (int64_t i = 0; i < static_cast<int64_t>(s.audio.size()); ++i)
    if (tampered.audio[static_cast<size_t>(i)] != s.audio[static_cast<size_t>(i)]) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  int64_t start = static_cast<int64_t>(std::llround(gt.audio_intervals[0].t_start * 2000));
  int64_t end = static_cast<int64_t>(std::llround(gt.audio_intervals[0].t_end * 2000));
  CHECK(lo >= start);
  CHECK(hi < end);
}

TEST_CASE("swap rejects a short donor") {
  AVStream s = make_stream(25, 25, 2000, 7);
  std::vector<double> donor(100, 0.1);
  Rng rng = make_rng(8);
  CHECK_THROWS_AS(swap_audio(s, 0.2, donor, rng), DimensionError);
}

TEST_CASE("substitution matches the displaced segment's rms") {
  AVStream s = make_stream(75, 25, 2000, 9);
  for (auto gen : {TamperPlan::Generator::kNoise, TamperPlan::Generator::kTone,
                   TamperPlan::Generator::kShuffle}) {
    Rng rng = make_rng(10);
    auto [tampered, gt] = substitute_audio(s, 0.2, gen, rng);
    int64_t start = static_cast<int64_t>(std::llround(gt.audio_intervals[0].t_start * 2000));
    int64_t end = static_cast<int64_t>(std::llround(gt.audio_intervals[0].t_end * 2000));
    int fade = static_cast<int>(std::lround(kCrossfadeSeconds * 2000));
    std::span<const double> orig(s.audio.data() + start, static_cast<size_t>(end - start));
    std::span<const double> sub(tampered.audio.data() + start + fade,
                                static_cast<size_t>(end - start - 2 * fade));
    double r0 = rms_of(orig), r1 = rms_of(sub);
    CHECK(std::abs(r1 - r0) / r0 < 0.10);
  }
}

TEST_CASE("tone substitution produces the configured tone interval") {
  AVStream s = make_stream(125, 25, 2000, 11);  // 5 s
  Rng rng = make_rng(12);
  auto [tampered, gt] = substitute_audio(s, 0.1, TamperPlan::Generator::kTone, rng);
  double len = gt.audio_intervals[0].t_end - gt.audio_intervals[0].t_start;
  CHECK(len == doctest::Approx(0.5));
}

TEST_CASE("tamper_frames modes") {
  AVStream s = make_stream(6, 25, 2000, 13);
  std::vector<Tensor> frames = s.frames;
  Rng rng = make_rng(14);

  tamper_frames(frames, {}, TamperPlan::VisualMode::kRegionNoise, 0, 0, 4, 4,
                nullptr, rng);
  for (size_t i = 0; i < frames.size(); ++i)
    CHECK(max_abs_diff(frames[i], s.frames[i]) == 0.0);

  tamper_frames(frames, {1, 3}, TamperPlan::VisualMode::kRegionNoise, 2, 2, 4, 4,
                nullptr, rng);
  for (size_t i = 0; i < frames.size(); ++i) {
    bool changed = max_abs_diff(frames[i], s.frames[i]) > 0.0;
    CHECK(changed == (i == 1 || i == 3));
  }
  // only the box differs
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t y = 0; y < 8; ++y)
      for (int64_t x = 0; x < 8; ++x) {
        bool in_box = x >= 2 && x < 6 && y >= 2 && y < 6;
        if (!in_box) CHECK(frames[1].at3(c, y, x) == s.frames[1].at3(c, y, x));
      }

  CHECK_THROWS_AS(tamper_frames(frames, {9}, TamperPlan::VisualMode::kRegionNoise,
                                0, 0, 4, 4, nullptr, rng),
                  DimensionError);
  CHECK_THROWS_AS(tamper_frames(frames, {0}, TamperPlan::VisualMode::kRegionNoise,
                                6, 6, 4, 4, nullptr, rng),
                  DimensionError);
}

TEST_CASE("region replacement reproduces the masking blend") {
  AVStream originals = make_stream(2, 25, 2000, 15);
  AVStream wm = make_stream(2, 25, 2000, 16);
  std::vector<Tensor> frames = wm.frames;
  Rng rng = make_rng(17);
  tamper_frames(frames, {0, 1}, TamperPlan::VisualMode::kRegionReplace, 1, 2, 3,
                4, &originals.frames, rng);

  Tensor mask({1, 8, 8});
  for (int64_t y = 2; y < 6; ++y)
    for (int64_t x = 1; x < 4; ++x) mask.at3(0, y, x) = 1.0;
  for (size_t i = 0; i < frames.size(); ++i) {
    Tensor blended = apply_mask(originals.frames[i], wm.frames[i], mask);
    CHECK(max_abs_diff(frames[i], blended) == 0.0);
  }
}

TEST_CASE("apply_plan is reproducible and audits cleanly") {
  AVStream s = make_stream(75, 25, 2000, 18);
  TamperPlan plan;
  plan.audio_mode = TamperPlan::AudioMode::kSwap;
  plan.fraction = 0.2;
  plan.visual_mode = TamperPlan::VisualMode::kRegionNoise;
  plan.seed = 77;
  std::vector<double> donor(s.audio.size(), 0.2);

  auto [t1, g1] = apply_plan(s, plan, donor, nullptr);
  auto [t2, g2] = apply_plan(s, plan, donor, nullptr);
  CHECK(t1.audio == t2.audio);
  CHECK(g1.audio_intervals[0].t_start == g2.audio_intervals[0].t_start);
  CHECK(g1.tampered_frame_indices == g2.tampered_frame_indices);
  CHECK(g1.tampered_frame_indices.size() == 75);  // all frames by default
  for (size_t i = 0; i < t1.frames.size(); ++i)
    CHECK(max_abs_diff(t1.frames[i], t2.frames[i]) == 0.0);
}

TEST_CASE("interval labels require half-chunk overlap") {
  std::vector<TamperInterval> iv = {{0.10, 0.20}};
  std::vector<int> labels = interval_labels(iv, 8, 0.04);
  // chunks: [0.08,0.12) covered 0.02 (half) -> 1; [0.12,0.16) full; [0.16,0.20) full
  std::vector<int> want = {0, 0, 1, 1, 1, 0, 0, 0};
  CHECK(labels == want);
}

TEST_CASE("ground truth file round trip") {
  GroundTruth gt;
  gt.audio_intervals = {{0.5, 1.25}};
  gt.tampered_frame_indices = {3, 4, 5};
  auto path = std::filesystem::temp_directory_path() / "avguard_gt_test.json";
  gt.save(path);
  GroundTruth back = GroundTruth::load(path);
  CHECK(back.audio_intervals[0].t_start == 0.5);
  CHECK(back.audio_intervals[0].t_end == 1.25);
  CHECK(back.tampered_frame_indices == gt.tampered_frame_indices);
  std::filesystem::remove(path);
}
