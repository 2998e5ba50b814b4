// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "avguard/autograd.hpp"
#include "avguard/rng.hpp"
#include "avguard/transforms.hpp"

using namespace avguard;
namespace agn = avguard::ag;

namespace {

Tensor random_tensor(std::vector<int64_t> shape, uint64_t seed, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(shape));
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.data) v = d(rng);
  return t;
}

using BuildFn =
    std::function<agn::VarPtr(const std::vector<agn::VarPtr>& leaves)>;

// Central finite differences against the analytic gradient on every element
// of every leaf. Returns the max relative error.
double grad_check(const BuildFn& build, std::vector<agn::VarPtr> leaves,
                  double h = 1e-5) {
  agn::VarPtr root = build(leaves);
  agn::zero_grad(leaves);
  agn::backward(root);
  std::vector<Tensor> analytic;
  for (auto& l : leaves) analytic.push_back(l->ensure_grad());

  double worst = 0.0;
  for (size_t li = 0; li < leaves.size(); ++li) {
    for (size_t i = 0; i < leaves[li]->value.data.size(); ++i) {
      double saved = leaves[li]->value.data[i];
      leaves[li]->value.data[i] = saved + h;
      double fp = build(leaves)->value.data[0];
      leaves[li]->value.data[i] = saved - h;
      double fm = build(leaves)->value.data[0];
      leaves[li]->value.data[i] = saved;
      double fd = (fp - fm) / (2.0 * h);
      double an = analytic[li].data[i];
      double rel = std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("elementwise op gradients") {
  auto a = agn::leaf(random_tensor({2, 3}, 1));
  auto b = agn::leaf(random_tensor({2, 3}, 2));
  BuildFn build = [](const std::vector<agn::VarPtr>& ls) {
    auto x = agn::mul(agn::add(ls[0], ls[1]), agn::sub(ls[0], agn::scale(ls[1], 0.7)));
    x = agn::vexp(agn::scale(x, 0.3));
    x = agn::sigmoid(x);
    return agn::mean_all(x);
  };
  CHECK(grad_check(build, {a, b}) < 1e-6);
}

TEST_CASE("leaky_relu gradient away from the kink") {
  Tensor t = random_tensor({4, 4}, 3);
  for (auto& v : t.data)
    if (std::abs(v) < 0.05) v = 0.1;  // keep probes off the kink
  auto a = agn::leaf(t);
  BuildFn build = [](const std::vector<agn::VarPtr>& ls) {
    return agn::mean_all(agn::leaky_relu(ls[0], 0.2));
  };
  CHECK(grad_check(build, {a}) < 1e-6);
}

TEST_CASE("ste ops forward values and passthrough gradient") {
  Tensor t({5});
  t.data = {-0.5, 0.2, 0.5017, 0.9, 1.7};
  auto a = agn::leaf(t);
  auto c = agn::clamp01_ste(a);
  CHECK(c->value.data[0] == 0.0);
  CHECK(c->value.data[4] == 1.0);
  auto q = agn::quantize8_ste(agn::clamp01_ste(a));
  for (double v : q->value.data) {
    CHECK(v == doctest::Approx(std::round(v * 255.0) / 255.0));
  }
  CHECK(q->value.data[2] == doctest::Approx(128.0 / 255.0));
  auto loss = agn::mean_all(q);
  agn::backward(loss);
  for (double g : a->grad.data) CHECK(g == doctest::Approx(0.2));
}

TEST_CASE("concat_channels gradient") {
  auto a = agn::leaf(random_tensor({2, 2, 3, 3}, 4));
  auto b = agn::leaf(random_tensor({2, 1, 3, 3}, 5));
  BuildFn build = [](const std::vector<agn::VarPtr>& ls) {
    auto c = agn::concat_channels({ls[0], ls[1]});
    return agn::mse(c, agn::scale(c, 0.0));
  };
  CHECK(grad_check(build, {a, b}) < 1e-6);
}

TEST_CASE("conv2d gradient, stride 1") {
  auto x = agn::leaf(random_tensor({2, 2, 4, 4}, 6));
  auto w = agn::leaf(random_tensor({3, 2, 3, 3}, 7, -0.5, 0.5));
  auto b = agn::leaf(random_tensor({3}, 8, -0.1, 0.1));
  Tensor target = random_tensor({2, 3, 4, 4}, 9);
  BuildFn build = [&target](const std::vector<agn::VarPtr>& ls) {
    return agn::mse(agn::conv2d(ls[0], ls[1], ls[2]), agn::constant(target));
  };
  CHECK(grad_check(build, {x, w, b}) < 1e-6);
}

TEST_CASE("conv2d gradient, frequency stride 2") {
  auto x = agn::leaf(random_tensor({1, 1, 8, 5}, 10));
  auto w = agn::leaf(random_tensor({2, 1, 3, 3}, 11, -0.5, 0.5));
  auto b = agn::leaf(random_tensor({2}, 12, -0.1, 0.1));
  Tensor target = random_tensor({1, 2, 4, 5}, 13);
  BuildFn build = [&target](const std::vector<agn::VarPtr>& ls) {
    return agn::mse(agn::conv2d(ls[0], ls[1], ls[2], 2, 1), agn::constant(target));
  };
  CHECK(grad_check(build, {x, w, b}) < 1e-6);
}

TEST_CASE("pool, linear and row normalization gradients") {
  auto x = agn::leaf(random_tensor({3, 2, 4, 4}, 14));
  auto w = agn::leaf(random_tensor({2, 5}, 15));
  auto b = agn::leaf(random_tensor({5}, 16, -0.1, 0.1));
  BuildFn build = [](const std::vector<agn::VarPtr>& ls) {
    auto f = agn::l2_normalize_rows(
        agn::linear(agn::global_avg_pool(ls[0]), ls[1], ls[2]));
    return agn::mean_all(agn::mul(f, f));
  };
  CHECK(grad_check(build, {x, w, b}) < 1e-6);
}

TEST_CASE("info_nce closed form for orthonormal T=2") {
  Tensor f({2, 2});
  f.data = {1.0, 0.0, 0.0, 1.0};
  auto fa = agn::leaf(f);
  auto fb = agn::leaf(f);
  Tensor empty_queue;
  auto loss = agn::info_nce(fa, fb, empty_queue, 1.0);
  double per_t = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
  CHECK(loss->value.data[0] == doctest::Approx(2.0 * per_t).epsilon(1e-10));
  CHECK(loss->value.data[0] == doctest::Approx(0.6265).epsilon(1e-3));
}

TEST_CASE("info_nce degenerate single candidate is zero") {
  Tensor f({1, 3});
  f.data = {0.6, -0.8, 0.0};
  auto loss = agn::info_nce(agn::leaf(f), agn::leaf(f), Tensor{}, 0.07);
  CHECK(loss->value.data[0] == doctest::Approx(0.0));
}

TEST_CASE("info_nce gradient with queue") {
  auto fa = agn::leaf(random_tensor({3, 4}, 17));
  auto fb = agn::leaf(random_tensor({3, 4}, 18));
  Tensor queue = random_tensor({5, 4}, 19);
  BuildFn build = [&queue](const std::vector<agn::VarPtr>& ls) {
    return agn::info_nce(ls[0], ls[1], queue, 0.5);
  };
  CHECK(grad_check(build, {fa, fb}) < 1e-6);
}

TEST_CASE("haar op gradient and adjoint consistency") {
  auto x = agn::leaf(random_tensor({2, 3, 4, 4}, 20));
  Tensor target = random_tensor({2, 12, 2, 2}, 21);
  BuildFn build = [&target](const std::vector<agn::VarPtr>& ls) {
    return agn::mse(agn::haar_squeeze_op(ls[0]), agn::constant(target));
  };
  CHECK(grad_check(build, {x}) < 1e-6);

  auto y = agn::leaf(random_tensor({2, 12, 2, 2}, 22));
  Tensor target2 = random_tensor({2, 3, 4, 4}, 23);
  BuildFn build2 = [&target2](const std::vector<agn::VarPtr>& ls) {
    return agn::mse(agn::haar_unsqueeze_op(ls[0]), agn::constant(target2));
  };
  CHECK(grad_check(build2, {y}) < 1e-6);
}

TEST_CASE("istft_op forward matches plain istft and gradient checks") {
  std::vector<double> chunk(80);
  Rng rng = make_rng(31);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (auto& v : chunk) v = d(rng);
  Spectrogram s = stft_chunk(chunk, 30, 15);
  PackingLayout layout;
  layout.window_size = 30;
  layout.hop_length = 15;
  Tensor plane3 = pack_spectrogram(s, 16, 16, &layout);
  Tensor plane({1, 1, 16, 16});
  plane.data = plane3.data;

  auto p = agn::leaf(plane);
  auto wav = agn::istft_op(p, layout, 80);
  std::vector<double> plain = istft_chunk(s, layout, 80);
  for (int i = 0; i < 80; ++i)
    CHECK(wav->value.data[static_cast<size_t>(i)] ==
          doctest::Approx(plain[static_cast<size_t>(i)]).epsilon(1e-12));

  Tensor target = random_tensor({1, 80}, 32, -0.5, 0.5);
  BuildFn build = [&layout, &target](const std::vector<agn::VarPtr>& ls) {
    return agn::mse(agn::istft_op(ls[0], layout, 80), agn::constant(target));
  };
  CHECK(grad_check(build, {p}) < 1e-6);
}

TEST_CASE("stft_logmag_op gradient") {
  auto w = agn::leaf(random_tensor({2, 40}, 33, -0.5, 0.5));
  BuildFn build = [](const std::vector<agn::VarPtr>& ls) {
    return agn::mean_all(agn::stft_logmag_op(ls[0], 10, 5, 1e-4));
  };
  CHECK(grad_check(build, {w}, 1e-6) < 1e-5);
}

TEST_CASE("gradients accumulate across shared subexpressions") {
  auto a = agn::leaf(random_tensor({3}, 34));
  BuildFn build = [](const std::vector<agn::VarPtr>& ls) {
    auto t = agn::vexp(ls[0]);
    return agn::mean_all(agn::add(agn::mul(t, t), agn::scale(t, 0.5)));
  };
  CHECK(grad_check(build, {a}) < 1e-6);
}

TEST_CASE("backward requires scalar root") {
  auto a = agn::leaf(random_tensor({2, 2}, 35));
  auto b = agn::vexp(a);
  CHECK_THROWS_AS(agn::backward(b), DimensionError);
}
