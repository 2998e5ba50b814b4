// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "avguard/errors.hpp"
#include "avguard/rng.hpp"
#include "avguard/transforms.hpp"

using namespace avguard;

namespace {

Tensor random_tensor(std::vector<int64_t> shape, uint64_t seed, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(shape));
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.data) v = d(rng);
  return t;
}

std::vector<double> random_chunk(int n, uint64_t seed, double amp = 0.5) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  std::vector<double> x(static_cast<size_t>(n));
  for (auto& v : x) v = d(rng);
  return x;
}

// Independent oracle: the Haar analysis operator as an explicit matrix over
// the flattened (C=1) 4x4 input, built directly from the 2x2 stencil.
std::vector<std::vector<double>> haar_matrix_4x4() {
  // output layout: channel s in {LL,LH,HL,HH}, then 2x2 spatial, row-major
  std::vector<std::vector<double>> m(16, std::vector<double>(16, 0.0));
  const double sgn[4][4] = {
      {1, 1, 1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, 1}};
  for (int s = 0; s < 4; ++s)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        int row = s * 4 + i * 2 + j;
        // block pixels: (2i,2j) (2i,2j+1) (2i+1,2j) (2i+1,2j+1)
        m[row][(2 * i) * 4 + 2 * j] = sgn[s][0] / 2.0;
        m[row][(2 * i) * 4 + 2 * j + 1] = sgn[s][1] / 2.0;
        m[row][(2 * i + 1) * 4 + 2 * j] = sgn[s][2] / 2.0;
        m[row][(2 * i + 1) * 4 + 2 * j + 1] = sgn[s][3] / 2.0;
      }
  return m;
}

}  // namespace

TEST_CASE("haar_squeeze constant 2x2 block") {
  Tensor x({1, 2, 2});
  x.fill(1.0);
  Tensor y = haar_squeeze(x);
  REQUIRE(y.shape == std::vector<int64_t>({4, 1, 1}));
  CHECK(y.data[0] == doctest::Approx(2.0));
  CHECK(y.data[1] == doctest::Approx(0.0));
  CHECK(y.data[2] == doctest::Approx(0.0));
  CHECK(y.data[3] == doctest::Approx(0.0));
}

TEST_CASE("haar_squeeze zero input stays zero") {
  Tensor x({3, 4, 4});
  Tensor y = haar_squeeze(x);
  REQUIRE(y.shape == std::vector<int64_t>({12, 2, 2}));
  for (double v : y.data) CHECK(v == 0.0);
}

TEST_CASE("haar_squeeze matches explicit matrix oracle") {
  Tensor x = random_tensor({1, 4, 4}, 42);
  Tensor y = haar_squeeze(x);
  auto m = haar_matrix_4x4();
  for (int row = 0; row < 16; ++row) {
    double expect = 0.0;
    for (int col = 0; col < 16; ++col) expect += m[row][col] * x.data[static_cast<size_t>(col)];
    CHECK(y.data[static_cast<size_t>(row)] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("haar_unsqueeze matches transpose oracle and inverts") {
  Tensor s = random_tensor({4, 2, 2}, 7);
  Tensor x = haar_unsqueeze(s);
  auto m = haar_matrix_4x4();
  for (int col = 0; col < 16; ++col) {
    double expect = 0.0;
    for (int row = 0; row < 16; ++row) expect += m[row][col] * s.data[static_cast<size_t>(row)];
    CHECK(x.data[static_cast<size_t>(col)] == doctest::Approx(expect).epsilon(1e-12));
  }
  Tensor back = haar_squeeze(x);
  CHECK(max_abs_diff(back, s) < 1e-12);

  Tensor inv({4, 1, 1});
  inv.data = {2.0, 0.0, 0.0, 0.0};
  Tensor flat = haar_unsqueeze(inv);
  for (double v : flat.data) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("haar dimension errors") {
  Tensor odd({1, 3, 4});
  CHECK_THROWS_AS(haar_squeeze(odd), DimensionError);
  Tensor badc({3, 2, 2});
  CHECK_THROWS_AS(haar_unsqueeze(badc), DimensionError);
}

TEST_CASE("frame_to_subbands constant frame") {
  Tensor f({3, 8, 8});
  f.fill(0.5);
  Tensor s = frame_to_subbands(f);
  REQUIRE(s.shape == std::vector<int64_t>({48, 2, 2}));
  // two orthonormal LL passes scale a constant by 4; every detail vanishes
  for (int64_t c = 0; c < 48; ++c)
    for (int64_t i = 0; i < 2; ++i)
      for (int64_t j = 0; j < 2; ++j) {
        double want = (c % 16 == 0) ? 2.0 : 0.0;
        CHECK(s.at3(c, i, j) == doctest::Approx(want));
      }
}

TEST_CASE("frame_to_subbands equals composed single levels and round-trips") {
  Tensor f = random_tensor({3, 8, 8}, 11, 0.0, 1.0);
  Tensor s = frame_to_subbands(f);
  Tensor composed = haar_squeeze(haar_squeeze(f));
  CHECK(max_abs_diff(s, composed) == 0.0);
  Tensor back = subbands_to_frame(s);
  CHECK(max_abs_diff(back, f) < 1e-6);
}

TEST_CASE("frame_to_subbands round trip and energy over many random frames") {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Tensor f = random_tensor({3, 16, 16}, 100 + seed, 0.0, 1.0);
    Tensor s = frame_to_subbands(f);
    CHECK(std::abs(l2_norm(s) - l2_norm(f)) <= 1e-6 * (1.0 + l2_norm(f)));
    CHECK(max_abs_diff(subbands_to_frame(s), f) < 1e-6);
  }
}

TEST_CASE("stft of zero chunk is zero") {
  std::vector<double> x(80, 0.0);
  Spectrogram s = stft_chunk(x, 30, 15);
  CHECK(s.bins == 16);
  for (auto& c : s.data) {
    CHECK(c.real() == 0.0);
    CHECK(c.imag() == 0.0);
  }
}

TEST_CASE("stft frame count matches window-position enumeration oracle") {
  // enumerate valid window placements over the padded signal
  auto oracle = [](int s, int win, int hop) {
    int padded = s + 2 * (win / 2);
    int count = 0;
    for (int off = 0; off + win <= padded; off += hop) ++count;
    return count;
  };
  Spectrogram s = stft_chunk(random_chunk(640, 3), 510, 128);
  CHECK(s.bins == 256);
  CHECK(s.frames == oracle(640, 510, 128));
  CHECK(s.frames == 6);

  Spectrogram d = stft_chunk(random_chunk(80, 4), 30, 15);
  CHECK(d.frames == oracle(80, 30, 15));
}

TEST_CASE("stft matches a direct DFT oracle on the padded signal") {
  int win = 30, hop = 15;
  std::vector<double> x = random_chunk(80, 9);
  Spectrogram s = stft_chunk(x, win, hop);

  std::vector<double> padded = reflect_pad(x, win / 2);
  std::vector<double> w = hann_window(win);
  for (int f = 0; f < s.frames; ++f) {
    for (int k = 0; k < s.bins; ++k) {
      double re = 0.0, im = 0.0;
      for (int n = 0; n < win; ++n) {
        double v = w[static_cast<size_t>(n)] * padded[static_cast<size_t>(f * hop + n)];
        re += v * std::cos(2.0 * M_PI * k * n / win);
        im -= v * std::sin(2.0 * M_PI * k * n / win);
      }
      CHECK(s.at(k, f).real() == doctest::Approx(re).epsilon(1e-10));
      CHECK(s.at(k, f).imag() == doctest::Approx(im).epsilon(1e-10));
    }
  }
}

TEST_CASE("bin-centered sinusoid concentrates energy") {
  int win = 30, hop = 15, bin = 5;
  int n = 160;
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    x[static_cast<size_t>(i)] = std::sin(2.0 * M_PI * bin * i / win);
  Spectrogram s = stft_chunk(x, win, hop);
  int mid = s.frames / 2;
  double total = 0.0, lobe = 0.0, best = 0.0;
  int best_bin = -1;
  for (int k = 0; k < s.bins; ++k) {
    double e = std::norm(s.at(k, mid));
    total += e;
    if (k >= bin - 1 && k <= bin + 1) lobe += e;
    if (e > best) {
      best = e;
      best_bin = k;
    }
  }
  // the Hann main lobe spans the bin and its two neighbours
  CHECK(best_bin == bin);
  CHECK(lobe >= 0.95 * total);
}

TEST_CASE("stft rejects too-short chunks") {
  std::vector<double> x(10, 0.1);
  CHECK_THROWS_AS(stft_chunk(x, 30, 15), DimensionError);  // shorter than one hop
}

TEST_CASE("istft round trip is exact in the interior") {
  std::vector<double> x = random_chunk(80, 21);
  Spectrogram s = stft_chunk(x, 30, 15);
  PackingLayout layout;
  Tensor plane = pack_spectrogram(s, 16, 16, &layout);
  layout.window_size = 30;
  layout.hop_length = 15;
  std::vector<double> y = istft_chunk(s, layout, 80);
  double max_err = 0.0;
  for (size_t i = 0; i < x.size(); ++i)
    max_err = std::max(max_err, std::abs(x[i] - y[i]));
  CHECK(max_err < 1e-5);

  Spectrogram z;
  z.bins = s.bins;
  z.frames = s.frames;
  z.data.assign(s.data.size(), {0.0, 0.0});
  std::vector<double> zero = istft_chunk(z, layout, 80);
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("istft round trip on a chirp reaches 60 dB") {
  int n = 640;
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / n;
    x[static_cast<size_t>(i)] = 0.5 * std::sin(2.0 * M_PI * (30.0 * t + 120.0 * t * t));
  }
  Spectrogram s = stft_chunk(x, 510, 128);
  PackingLayout layout{.n_fft_bins = s.bins,
                       .n_time_frames = s.frames,
                       .real_imag_order = "real_then_imag",
                       .pad_count = 0,
                       .window_size = 510,
                       .hop_length = 128};
  std::vector<double> y = istft_chunk(s, layout, n);
  double sig = 0.0, err = 0.0;
  for (int i = 0; i < n; ++i) {
    sig += x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
    double d = x[static_cast<size_t>(i)] - y[static_cast<size_t>(i)];
    err += d * d;
  }
  double snr = 10.0 * std::log10(sig / err);
  CHECK(snr >= 60.0);
}

TEST_CASE("istft layout mismatch is rejected") {
  std::vector<double> x = random_chunk(80, 5);
  Spectrogram s = stft_chunk(x, 30, 15);
  PackingLayout layout{.n_fft_bins = s.bins,
                       .n_time_frames = s.frames + 1,
                       .real_imag_order = "real_then_imag",
                       .pad_count = 0,
                       .window_size = 30,
                       .hop_length = 15};
  CHECK_THROWS_AS(istft_chunk(s, layout, 80), LayoutError);
}

TEST_CASE("pack layout arithmetic for the 256-bin case") {
  Spectrogram s;
  s.bins = 256;
  s.frames = 6;
  s.data.assign(static_cast<size_t>(256 * 6), {0.0, 0.0});
  PackingLayout layout;
  Tensor plane = pack_spectrogram(s, 64, 64, &layout);
  CHECK(layout.n_fft_bins == 256);
  CHECK(layout.n_time_frames == 6);
  CHECK(layout.pad_count == 1024);
  CHECK(2 * layout.n_fft_bins * layout.n_time_frames + layout.pad_count == 64 * 64);
  for (double v : plane.data) CHECK(v == 0.0);
}

TEST_CASE("pack/unpack round trip is bit exact") {
  std::vector<double> x = random_chunk(80, 33);
  Spectrogram s = stft_chunk(x, 30, 15);
  PackingLayout layout;
  layout.window_size = 30;
  layout.hop_length = 15;
  Tensor plane = pack_spectrogram(s, 16, 16, &layout);
  Spectrogram back = unpack_spectrogram(plane, layout);
  REQUIRE(back.bins == s.bins);
  REQUIRE(back.frames == s.frames);
  for (size_t i = 0; i < s.data.size(); ++i) {
    CHECK(back.data[i].real() == s.data[i].real());
    CHECK(back.data[i].imag() == s.data[i].imag());
  }
}

TEST_CASE("hand-packed toy layout reads back by the packing rule") {
  Spectrogram s;
  s.bins = 2;
  s.frames = 1;
  s.data = {{1.5, -0.25}, {3.0, 0.75}};
  PackingLayout layout;
  layout.window_size = 2;
  layout.hop_length = 1;
  Tensor plane = pack_spectrogram(s, 2, 4, &layout);
  // reals first in (bin, frame) order, then imaginaries, then zero padding
  CHECK(plane.data[0] == 1.5);
  CHECK(plane.data[1] == 3.0);
  CHECK(plane.data[2] == -0.25);
  CHECK(plane.data[3] == 0.75);
  for (size_t i = 4; i < 8; ++i) CHECK(plane.data[i] == 0.0);
  CHECK(layout.pad_count == 4);

  Spectrogram back = unpack_spectrogram(plane, layout);
  CHECK(back.at(0, 0) == s.at(0, 0));
  CHECK(back.at(1, 0) == s.at(1, 0));
}

TEST_CASE("pack capacity error names the sizes") {
  Spectrogram s;
  s.bins = 16;
  s.frames = 12;
  s.data.assign(16 * 12, {1.0, 1.0});
  try {
    pack_spectrogram(s, 8, 8, nullptr);
    FAIL("expected capacity error");
  } catch (const CapacityError& e) {
    std::string msg = e.what();
    CHECK(msg.find("384") != std::string::npos);
    CHECK(msg.find("64") != std::string::npos);
  }
}

TEST_CASE("unpack rejects inconsistent layouts") {
  Tensor plane({1, 4, 4});
  PackingLayout layout{.n_fft_bins = 3,
                       .n_time_frames = 3,
                       .real_imag_order = "real_then_imag",
                       .pad_count = 0,
                       .window_size = 4,
                       .hop_length = 2};
  CHECK_THROWS_AS(unpack_spectrogram(plane, layout), LayoutError);
}
