// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "avguard/container.hpp"
#include "avguard/errors.hpp"
#include "avguard/rng.hpp"

namespace avguard {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Shape {
  double x, y, vx, vy;
  double half_w, half_h;
  double color[3];
  bool round;
};

Tensor smooth_background(int h, int w, Rng& rng) {
  // coarse control grid, bilinearly upsampled
  const int g = 6;
  std::uniform_real_distribution<double> d(0.2, 0.8);
  std::vector<double> grid(3 * g * g);
  for (auto& v : grid) v = d(rng);
  Tensor bg({3, h, w});
  for (int64_t c = 0; c < 3; ++c)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        double gy = static_cast<double>(i) / h * (g - 1);
        double gx = static_cast<double>(j) / w * (g - 1);
        int y0 = static_cast<int>(gy), x0 = static_cast<int>(gx);
        int y1 = std::min(y0 + 1, g - 1), x1 = std::min(x0 + 1, g - 1);
        double fy = gy - y0, fx = gx - x0;
        auto at = [&](int yy, int xx) {
          return grid[static_cast<size_t>((c * g + yy) * g + xx)];
        };
        bg.at3(c, i, j) = (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x1)) +
                          fy * ((1 - fx) * at(y1, x0) + fx * at(y1, x1));
      }
  return bg;
}

std::vector<double> synth_audio(int n, int sample_rate, Rng& rng) {
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // note sequence: 1-3 partials each, changing every 100-300 ms
  double f_max = 0.35 * sample_rate;
  int pos = 0;
  while (pos < n) {
    int dur = static_cast<int>((0.1 + 0.2 * u01(rng)) * sample_rate);
    dur = std::min(dur, n - pos);
    int n_part = 1 + static_cast<int>(u01(rng) * 3.0);
    n_part = std::min(n_part, 3);
    double base = 80.0 * std::pow(f_max / 80.0, u01(rng));
    for (int p = 0; p < n_part; ++p) {
      double freq = std::min(base * (p + 1) * (0.95 + 0.1 * u01(rng)), f_max);
      double amp = 0.6 / (p + 1.0);
      double phase = 2.0 * kPi * u01(rng);
      int attack = std::max(1, sample_rate / 100);
      int release = std::max(1, sample_rate / 50);
      for (int i = 0; i < dur; ++i) {
        double env = 1.0;
        if (i < attack) env = static_cast<double>(i) / attack;
        if (dur - 1 - i < release)
          env = std::min(env, static_cast<double>(dur - 1 - i) / release);
        x[static_cast<size_t>(pos + i)] +=
            amp * env * std::sin(2.0 * kPi * freq * i / sample_rate + phase);
      }
    }
    pos += dur;
  }

  // low-passed noise bed with a slow amplitude wobble
  std::normal_distribution<double> gauss(0.0, 1.0);
  double lp = 0.0, alpha = 0.2;
  double am_freq = 2.0 + 6.0 * u01(rng);
  double am_phase = 2.0 * kPi * u01(rng);
  for (int i = 0; i < n; ++i) {
    lp = (1.0 - alpha) * lp + alpha * gauss(rng);
    double am = 0.5 + 0.5 * std::sin(2.0 * kPi * am_freq * i / sample_rate + am_phase);
    x[static_cast<size_t>(i)] += 0.15 * am * lp;
  }

  // RMS target inside [0.05, 0.5], peak-safe
  double target = 0.08 + 0.27 * u01(rng);
  double rms = 0.0;
  for (double v : x) rms += v * v;
  rms = std::sqrt(rms / n);
  double scale = rms > 0 ? target / rms : 0.0;
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v * scale));
  if (peak > 0.97) scale *= 0.97 / peak;
  for (auto& v : x) v = std::round(v * scale * 32767.0) / 32767.0;
  return x;
}

}  // namespace

AVStream gen_synthetic_clip(const SynthSpec& spec, uint64_t clip_index) {
  if (spec.width % 4 != 0 || spec.height % 4 != 0)
    throw ConfigError("synthetic frames must have dimensions divisible by 4");
  if (spec.sample_rate % spec.fps != 0)
    throw ConfigError("synthetic sample_rate must be a multiple of fps");
  Rng rng = make_rng(spec.seed, 0xC11F + clip_index);

  int n_frames = static_cast<int>(std::lround(spec.duration_s * spec.fps));
  if (n_frames < 1) throw ConfigError("clip duration shorter than one frame");
  int h = spec.height, w = spec.width;

  Tensor bg = smooth_background(h, w, rng);

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int n_shapes = 2 + static_cast<int>(u01(rng) * 3.0);
  std::vector<Shape> shapes;
  for (int i = 0; i < n_shapes; ++i) {
    Shape s;
    s.half_w = (0.05 + 0.1 * u01(rng)) * w;
    s.half_h = (0.05 + 0.1 * u01(rng)) * h;
    s.x = s.half_w + u01(rng) * (w - 2 * s.half_w);
    s.y = s.half_h + u01(rng) * (h - 2 * s.half_h);
    s.vx = (u01(rng) - 0.5) * 3.0;
    s.vy = (u01(rng) - 0.5) * 3.0;
    for (double& c : s.color) c = 0.1 + 0.8 * u01(rng);
    s.round = u01(rng) < 0.5;
    shapes.push_back(s);
  }

  AVStream stream;
  stream.fps = spec.fps;
  stream.sample_rate = spec.sample_rate;
  stream.frames.reserve(static_cast<size_t>(n_frames));
  for (int f = 0; f < n_frames; ++f) {
    Tensor frame = bg;
    for (const Shape& s : shapes) {
      int y0 = std::max(0, static_cast<int>(s.y - s.half_h));
      int y1 = std::min(h - 1, static_cast<int>(s.y + s.half_h));
      int x0 = std::max(0, static_cast<int>(s.x - s.half_w));
      int x1 = std::min(w - 1, static_cast<int>(s.x + s.half_w));
      for (int i = y0; i <= y1; ++i)
        for (int j = x0; j <= x1; ++j) {
          if (s.round) {
            double dy = (i - s.y) / s.half_h, dx = (j - s.x) / s.half_w;
            if (dy * dy + dx * dx > 1.0) continue;
          }
          for (int64_t c = 0; c < 3; ++c) frame.at3(c, i, j) = s.color[c];
        }
    }
    for (auto& v : frame.data) v = std::round(v * 255.0) / 255.0;
    stream.frames.push_back(std::move(frame));
    for (Shape& s : shapes) {
      s.x += s.vx;
      s.y += s.vy;
      if (s.x < s.half_w || s.x > w - s.half_w) s.vx = -s.vx;
      if (s.y < s.half_h || s.y > h - s.half_h) s.vy = -s.vy;
      s.x = std::clamp(s.x, s.half_w, w - s.half_w);
      s.y = std::clamp(s.y, s.half_h, h - s.half_h);
    }
  }

  int n_samples = n_frames * (spec.sample_rate / spec.fps);
  stream.audio = synth_audio(n_samples, spec.sample_rate, rng);
  validate_stream(stream);
  return stream;
}

void gen_synthetic_dataset(const std::filesystem::path& out_dir,
                           const SynthSpec& spec) {
  if (spec.n_clips < 1) throw ConfigError("need at least one clip");
  std::filesystem::create_directories(out_dir);
  for (int i = 0; i < spec.n_clips; ++i) {
    AVStream clip = gen_synthetic_clip(spec, static_cast<uint64_t>(i));
    char name[32];
    std::snprintf(name, sizeof(name), "clip_%04d", i);
    ContainerMeta meta;
    meta.role = "original";
    write_container(out_dir / name, clip, meta);
  }
}

}  // namespace avguard
