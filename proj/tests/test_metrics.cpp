// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "avguard/errors.hpp"
#include "avguard/metrics.hpp"
#include "avguard/rng.hpp"
#include "avguard/transforms.hpp"

using namespace avguard;

namespace {

std::vector<double> random_signal(int n, uint64_t seed, double amp = 1.0) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  std::vector<double> x(static_cast<size_t>(n));
  for (auto& v : x) v = d(rng);
  return x;
}

Tensor random_frame(int64_t c, int64_t h, int64_t w, uint64_t seed) {
  Tensor t({c, h, w});
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (auto& v : t.data) v = d(rng);
  return t;
}

}  // namespace

TEST_CASE("snr analytic cases") {
  std::vector<double> ref = random_signal(256, 1);
  CHECK(snr_db(ref, ref) == kDbCap);

  for (double eps : {0.1, 0.01}) {
    std::vector<double> est(ref.size());
    for (size_t i = 0; i < ref.size(); ++i) est[i] = ref[i] * (1.0 + eps);
    CHECK(snr_db(ref, est) == doctest::Approx(-20.0 * std::log10(eps)).epsilon(1e-6));
  }

  std::vector<double> zero(16, 0.0);
  std::span<const double> head(ref.data(), 16);
  CHECK_THROWS_AS(snr_db(zero, head), NumericError);
}

TEST_CASE("snr matches the direct formula oracle") {
  std::vector<double> ref = random_signal(64, 2);
  std::vector<double> est = random_signal(64, 3);
  double sig = 0.0, err = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    sig += ref[i] * ref[i];
    err += (ref[i] - est[i]) * (ref[i] - est[i]);
  }
  double want = 10.0 * std::log10(sig / err);
  CHECK(snr_db(ref, est) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("psnr analytic cases") {
  Tensor a = random_frame(3, 16, 16, 4);
  CHECK(psnr_db(a, a) == kDbCap);
  Tensor b = a;
  for (auto& v : b.data) v += 0.1;
  CHECK(psnr_db(a, b) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("ssim identical and offset frames") {
  Tensor a = random_frame(3, 16, 16, 5);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  Tensor b = a;
  for (auto& v : b.data) v = std::min(1.0, v + 0.25);
  CHECK(ssim(a, b) < 1.0);
}

TEST_CASE("ssim matches the direct sliding-window oracle") {
  Tensor a = random_frame(2, 14, 15, 6);
  Tensor b = random_frame(2, 14, 15, 7);
  // oracle: direct per-window weighted statistics
  std::vector<double> k(11);
  double ks = 0.0;
  for (int i = 0; i < 11; ++i) {
    k[static_cast<size_t>(i)] = std::exp(-(i - 5.0) * (i - 5.0) / (2.0 * 2.25));
    ks += k[static_cast<size_t>(i)];
  }
  for (auto& v : k) v /= ks;
  double c1 = 1e-4, c2 = 9e-4, total = 0.0;
  int count = 0;
  for (int64_t c = 0; c < 2; ++c)
    for (int64_t i = 0; i + 11 <= 14; ++i)
      for (int64_t j = 0; j + 11 <= 15; ++j) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int u = 0; u < 11; ++u)
          for (int v = 0; v < 11; ++v) {
            double wgt = k[static_cast<size_t>(u)] * k[static_cast<size_t>(v)];
            double xv = a.at3(c, i + u, j + v), yv = b.at3(c, i + u, j + v);
            mx += wgt * xv;
            my += wgt * yv;
            sxx += wgt * xv * xv;
            syy += wgt * yv * yv;
            sxy += wgt * xv * yv;
          }
        double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
        total += ((2 * mx * my + c1) * (2 * cxy + c2)) /
                 ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
  CHECK(ssim(a, b) == doctest::Approx(total / count).epsilon(1e-6));
}

TEST_CASE("interval iou analytic cases") {
  CHECK(interval_iou({{0.0, 1.0}}, {{0.5, 1.5}}) == doctest::Approx(1.0 / 3.0));
  CHECK(interval_iou({{0.0, 1.0}, {2.0, 3.0}}, {{0.0, 1.0}, {2.0, 3.0}}) ==
        doctest::Approx(1.0));
  CHECK(interval_iou({}, {}) == 1.0);
  CHECK(interval_iou({{0.0, 1.0}}, {}) == 0.0);
  CHECK(interval_iou({{0.0, 0.5}, {0.25, 1.0}}, {{0.0, 1.0}}) == doctest::Approx(1.0));
}

TEST_CASE("interval iou matches a millisecond rasterized oracle") {
  Rng rng = make_rng(8);
  std::uniform_int_distribution<int> ms(0, 5000);
  for (int trial = 0; trial < 20; ++trial) {
    auto gen = [&](int n) {
      std::vector<TamperInterval> xs;
      for (int i = 0; i < n; ++i) {
        int a = ms(rng), b = ms(rng);
        if (a == b) b = a + 1;
        xs.push_back({std::min(a, b) / 1000.0, std::max(a, b) / 1000.0});
      }
      return xs;
    };
    std::vector<TamperInterval> p = gen(1 + trial % 3), t = gen(1 + (trial / 3) % 3);

    std::vector<char> rp(5001, 0), rt(5001, 0);
    for (const auto& x : p)
      for (int i = static_cast<int>(std::lround(x.t_start * 1000)); i < static_cast<int>(std::lround(x.t_end * 1000)); ++i)
        rp[static_cast<size_t>(i)] = 1;
    for (const auto& x : t)
      for (int i = static_cast<int>(std::lround(x.t_start * 1000)); i < static_cast<int>(std::lround(x.t_end * 1000)); ++i)
        rt[static_cast<size_t>(i)] = 1;
    int inter = 0, uni = 0;
    for (size_t i = 0; i < rp.size(); ++i) {
      inter += rp[i] && rt[i];
      uni += rp[i] || rt[i];
    }
    double want = uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
    CHECK(interval_iou(p, t) == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("iou symmetry and range") {
  Rng rng = make_rng(88);
  std::uniform_real_distribution<double> d(0.0, 10.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<TamperInterval> p, t;
    for (int i = 0; i < 2; ++i) {
      double a = d(rng), b = d(rng);
      if (a == b) b += 0.1;
      p.push_back({std::min(a, b), std::max(a, b)});
      a = d(rng);
      b = d(rng);
      if (a == b) b += 0.1;
      t.push_back({std::min(a, b), std::max(a, b)});
    }
    double ab = interval_iou(p, t), ba = interval_iou(t, p);
    CHECK(ab == doctest::Approx(ba));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("ap and auc on separable and inverted inputs") {
  std::vector<double> s{0.9, 0.8, 0.2, 0.1};
  std::vector<int> l{1, 1, 0, 0};
  CHECK(average_precision(s, l) == doctest::Approx(1.0));
  CHECK(auc_score(s, l) == doctest::Approx(1.0));

  std::vector<double> s2{0.1, 0.9};
  std::vector<int> l2{1, 0};
  CHECK(auc_score(s2, l2) == doctest::Approx(0.0));

  std::vector<int> ones{1, 1};
  CHECK_THROWS_AS(auc_score(s2, ones), NumericError);
  CHECK(average_precision(s2, ones) == doctest::Approx(1.0));
}

TEST_CASE("ap and auc match brute-force oracles with ties") {
  Rng rng = make_rng(9);
  std::uniform_int_distribution<int> score_d(0, 7);  // forces ties
  std::uniform_int_distribution<int> lab_d(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 16;
    std::vector<double> s(static_cast<size_t>(n));
    std::vector<int> l(static_cast<size_t>(n));
    int n_pos = 0;
    for (int i = 0; i < n; ++i) {
      s[static_cast<size_t>(i)] = score_d(rng) / 7.0;
      l[static_cast<size_t>(i)] = lab_d(rng);
      n_pos += l[static_cast<size_t>(i)];
    }
    if (n_pos == 0 || n_pos == n) continue;

    // AUC oracle: exhaustive pair comparison, ties half
    double wins = 0.0;
    int64_t pairs = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (l[static_cast<size_t>(i)] == 1 && l[static_cast<size_t>(j)] == 0) {
          ++pairs;
          if (s[static_cast<size_t>(i)] > s[static_cast<size_t>(j)])
            wins += 1.0;
          else if (s[static_cast<size_t>(i)] == s[static_cast<size_t>(j)])
            wins += 0.5;
        }
    CHECK(auc_score(s, l) == doctest::Approx(wins / pairs).epsilon(1e-12));

    // AP oracle: step integration over the distinct thresholds
    std::vector<double> thresholds = s;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    double ap = 0.0, prev_recall = 0.0;
    for (double th : thresholds) {
      int tp = 0, fp = 0;
      for (int i = 0; i < n; ++i)
        if (s[static_cast<size_t>(i)] >= th) {
          if (l[static_cast<size_t>(i)])
            ++tp;
          else
            ++fp;
        }
      double recall = static_cast<double>(tp) / n_pos;
      double precision = static_cast<double>(tp) / (tp + fp);
      ap += (recall - prev_recall) * precision;
      prev_recall = recall;
    }
    CHECK(average_precision(s, l) == doctest::Approx(ap).epsilon(1e-12));
  }
}

TEST_CASE("auc is invariant under monotone score transforms") {
  std::vector<double> s = random_signal(20, 10);
  std::vector<int> l(20);
  for (int i = 0; i < 20; ++i) l[static_cast<size_t>(i)] = i % 3 == 0;
  double base = auc_score(s, l);
  std::vector<double> warped(s.size());
  for (size_t i = 0; i < s.size(); ++i) warped[i] = std::tanh(3.0 * s[i]) + 5.0;
  CHECK(auc_score(warped, l) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("log spectral distance cases") {
  std::vector<double> x = random_signal(640, 11, 0.5);
  CHECK(log_spectral_distance(x, x, 64, 16) == doctest::Approx(0.0));

  std::vector<double> silence(x.size(), 0.0);
  double d = log_spectral_distance(x, silence, 64, 16);
  CHECK(std::isfinite(d));
  CHECK(d > 0.0);
  CHECK(d <= 160.0);  // both planes floored at -80 dB

  // direct formula oracle
  std::vector<double> y = random_signal(640, 12, 0.5);
  Spectrogram sa = stft_chunk(x, 64, 16), sb = stft_chunk(y, 64, 16);
  double acc = 0.0;
  for (size_t i = 0; i < sa.data.size(); ++i) {
    double la = std::max(20.0 * std::log10(std::abs(sa.data[i])), -80.0);
    double lb = std::max(20.0 * std::log10(std::abs(sb.data[i])), -80.0);
    acc += (la - lb) * (la - lb);
  }
  double want = std::sqrt(acc / static_cast<double>(sa.data.size()));
  CHECK(log_spectral_distance(x, y, 64, 16) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("metric report json round trip") {
  MetricReport r;
  r.snr_db = 12.5;
  r.iou = 0.75;
  auto j = r.to_json();
  MetricReport back = MetricReport::from_json(j);
  CHECK(back.snr_db == 12.5);
  CHECK(back.iou == 0.75);
  CHECK(!back.psnr_db.has_value());
}
