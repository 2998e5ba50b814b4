// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>

#include "avguard/errors.hpp"
#include "avguard/model.hpp"
#include "avguard/rng.hpp"
#include "avguard/sfe_localizer.hpp"

using namespace avguard;

namespace {

SfeWeights<double> sfe_fixture(uint64_t seed) {
  Rng rng = make_rng(seed);
  SfeNet net(8, 16, 0.2, rng);
  return net.weights<double>();
}

std::vector<double> random_audio(int n, uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  std::vector<double> x(static_cast<size_t>(n));
  for (auto& v : x) v = d(rng);
  return x;
}

FeatureMap map_from(const Tensor& features, double dt = 0.04) {
  FeatureMap m;
  m.features = features;
  m.timestep_duration = dt;
  // normalize rows the way the extractor does
  int64_t t = features.dim(0), c = features.dim(1);
  for (int64_t r = 0; r < t; ++r) {
    double nrm = 0;
    for (int64_t i = 0; i < c; ++i) {
      double v = m.features.data[static_cast<size_t>(r * c + i)];
      nrm += v * v;
    }
    nrm = std::sqrt(nrm) + 1e-12;
    for (int64_t i = 0; i < c; ++i)
      m.features.data[static_cast<size_t>(r * c + i)] /= nrm;
  }
  return m;
}

}  // namespace

TEST_CASE("extract_features is deterministic with unit-norm rows") {
  auto sfe = sfe_fixture(1);
  std::vector<double> audio = random_audio(10000, 2);  // 5 s at 2 kHz
  FeatureMap a = extract_features(audio, sfe, 80, 30, 15, 0.04);
  FeatureMap b = extract_features(audio, sfe, 80, 30, 15, 0.04);
  CHECK(a.features.data == b.features.data);
  REQUIRE(a.features.dim(0) == 125);  // one row per 40 ms chunk
  for (int64_t t = 0; t < a.features.dim(0); ++t) {
    double nrm = 0;
    for (int64_t c = 0; c < a.features.dim(1); ++c) {
      double v = a.features.data[static_cast<size_t>(t * a.features.dim(1) + c)];
      nrm += v * v;
    }
    CHECK(std::abs(std::sqrt(nrm) - 1.0) < 1e-6);
  }
}

TEST_CASE("extract_features rejects bad input") {
  auto sfe = sfe_fixture(3);
  std::vector<double> empty;
  CHECK_THROWS_AS(extract_features(empty, sfe, 80, 30, 15, 0.04), DimensionError);
  std::vector<double> odd = random_audio(81, 4);
  CHECK_THROWS_AS(extract_features(odd, sfe, 80, 30, 15, 0.04), DimensionError);
}

TEST_CASE("similarity of a map with itself is one") {
  auto sfe = sfe_fixture(5);
  std::vector<double> audio = random_audio(800, 6);
  FeatureMap f = extract_features(audio, sfe, 80, 30, 15, 0.04);
  TamperScoreSeries s = similarity_scores(f, f);
  for (double v : s.scores) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("orthogonal rows score zero") {
  Tensor fa({2, 4}), fb({2, 4});
  fa.data = {1, 0, 0, 0, 0, 1, 0, 0};
  fb.data = {0, 0, 1, 0, 0, 0, 0, 1};
  TamperScoreSeries s = similarity_scores(map_from(fa), map_from(fb), 1);
  CHECK(s.scores[0] == doctest::Approx(0.0));
  CHECK(s.scores[1] == doctest::Approx(0.0));
}

TEST_CASE("hand-built 3x2 maps match a scalar + median oracle") {
  Tensor fa({3, 2}), fb({3, 2});
  fa.data = {1, 0, 0, 1, 1, 0};
  fb.data = {1, 0, 1, 0, 0, 1};
  // raw scores: 1, 0, 0 ; median-3 with replicated edges: 1, 0, 0
  TamperScoreSeries s = similarity_scores(map_from(fa), map_from(fb), 3);
  CHECK(s.scores[0] == doctest::Approx(1.0));
  CHECK(s.scores[1] == doctest::Approx(0.0));
  CHECK(s.scores[2] == doctest::Approx(0.0));
}

TEST_CASE("similarity is symmetric and scale invariant pre-normalization") {
  Rng rng = make_rng(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Tensor f({5, 8}), g({5, 8});
  for (auto& v : f.data) v = d(rng);
  for (auto& v : g.data) v = d(rng);
  Tensor f_scaled = f;
  for (int64_t t = 0; t < 5; ++t)
    for (int64_t c = 0; c < 8; ++c)
      f_scaled.data[static_cast<size_t>(t * 8 + c)] *= (1.0 + t);  // per-row scale

  TamperScoreSeries ab = similarity_scores(map_from(f), map_from(g));
  TamperScoreSeries ba = similarity_scores(map_from(g), map_from(f));
  TamperScoreSeries scaled = similarity_scores(map_from(f_scaled), map_from(g));
  for (size_t i = 0; i < ab.scores.size(); ++i) {
    CHECK(ab.scores[i] == doctest::Approx(ba.scores[i]));
    CHECK(ab.scores[i] == doctest::Approx(scaled.scores[i]).epsilon(1e-9));
  }
}

TEST_CASE("similarity rejects mismatched maps") {
  Tensor fa({2, 4}), fb({3, 4});
  CHECK_THROWS_AS(similarity_scores(map_from(fa), map_from(fb)), DimensionError);
}

TEST_CASE("scores_to_intervals run merging") {
  TamperScoreSeries s;
  s.timestep_duration = 0.04;

  s.scores = {1, 1, 1, 1};
  CHECK(scores_to_intervals(s, 0.5).empty());

  s.scores = {1, 1, 0.1, 0.1, 0.1, 1};
  auto iv = scores_to_intervals(s, 0.5);
  REQUIRE(iv.size() == 1);
  CHECK(iv[0].t_start == doctest::Approx(0.08));
  CHECK(iv[0].t_end == doctest::Approx(0.20));

  s.scores = {0.1, 0.1, 0.1, 0.1};
  iv = scores_to_intervals(s, 0.5);
  REQUIRE(iv.size() == 1);
  CHECK(iv[0].t_start == doctest::Approx(0.0));
  CHECK(iv[0].t_end == doctest::Approx(0.16));

  // single-timestep dips are discarded
  s.scores = {1, 0.1, 1, 1, 0.1, 0.1, 1};
  iv = scores_to_intervals(s, 0.5, 2);
  REQUIRE(iv.size() == 1);
  CHECK(iv[0].t_start == doctest::Approx(0.16));
}

TEST_CASE("intervals are disjoint, sorted and within bounds") {
  Rng rng = make_rng(8);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    TamperScoreSeries s;
    s.timestep_duration = 0.04;
    s.scores.resize(50);
    for (auto& v : s.scores) v = d(rng);
    auto iv = scores_to_intervals(s, 0.0);
    for (size_t i = 0; i < iv.size(); ++i) {
      CHECK(iv[i].t_start < iv[i].t_end);
      CHECK(iv[i].t_start >= 0.0);
      CHECK(iv[i].t_end <= 50 * 0.04 + 1e-12);
      if (i > 0) CHECK(iv[i].t_start > iv[i - 1].t_end);
    }
  }
}

TEST_CASE("raw waveform scores rank a corrupted chunk lowest") {
  std::vector<double> a = random_audio(800, 9);
  std::vector<double> b = a;
  TamperScoreSeries same = raw_waveform_scores(a, b, 80, 0.04);
  for (double v : same.scores) CHECK(v == doctest::Approx(1.0));

  Rng rng = make_rng(10);
  std::uniform_real_distribution<double> d(-0.9, 0.9);
  for (int i = 0; i < 80; ++i) b[static_cast<size_t>(3 * 80 + i)] = d(rng);
  TamperScoreSeries s = raw_waveform_scores(a, b, 80, 0.04);
  for (size_t t = 0; t < s.scores.size(); ++t)
    if (t != 3) CHECK(s.scores[3] < s.scores[t]);

  std::vector<double> za(160, 0.0), zb(160, 0.0);
  TamperScoreSeries z = raw_waveform_scores(za, zb, 80, 0.04);
  for (double v : z.scores) CHECK(v == doctest::Approx(1.0));

  std::vector<double> shorter(79, 0.0);
  CHECK_THROWS_AS(raw_waveform_scores(a, shorter, 80, 0.04), DimensionError);
}

TEST_CASE("tamper report round-trips through its parser") {
  TamperReport r;
  r.scores.timestep_duration = 0.04;
  r.scores.scores = {0.9, 0.8, -0.1, 0.95};
  r.threshold = 0.25;
  r.intervals = {{0.08, 0.12}};
  r.metrics.iou = 0.5;
  r.metrics.ap = 0.75;

  auto path = std::filesystem::temp_directory_path() / "avguard_report_test.json";
  r.save(path);
  TamperReport back = TamperReport::load(path);
  CHECK(back.scores.scores == r.scores.scores);
  CHECK(back.threshold == r.threshold);
  REQUIRE(back.intervals.size() == 1);
  CHECK(back.intervals[0].t_start == r.intervals[0].t_start);
  CHECK(back.metrics.iou == r.metrics.iou);
  CHECK(back.metrics.ap == r.metrics.ap);
  CHECK(!back.metrics.auc.has_value());
  std::filesystem::remove(path);
}
