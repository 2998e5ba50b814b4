// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/transforms.hpp"

#include <cmath>

#include "avguard/errors.hpp"

namespace avguard {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kEnvelopeFloor = 1e-10;
}  // namespace

template <typename S>
TensorT<S> haar_squeeze(const TensorT<S>& x) {
  if (x.ndim() != 3) throw DimensionError("haar_squeeze expects (C,H,W)");
  int64_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h % 2 != 0 || w % 2 != 0)
    throw DimensionError("haar_squeeze requires even spatial dimensions, got " +
                         x.shape_str());
  TensorT<S> out({4 * c, h / 2, w / 2});
  for (int64_t ci = 0; ci < c; ++ci) {
    for (int64_t i = 0; i < h / 2; ++i) {
      for (int64_t j = 0; j < w / 2; ++j) {
        S a = x.at3(ci, 2 * i, 2 * j);
        S b = x.at3(ci, 2 * i, 2 * j + 1);
        S cc = x.at3(ci, 2 * i + 1, 2 * j);
        S d = x.at3(ci, 2 * i + 1, 2 * j + 1);
        out.at3(4 * ci + 0, i, j) = (a + b + cc + d) / S(2);  // LL
        out.at3(4 * ci + 1, i, j) = (a - b + cc - d) / S(2);  // LH
        out.at3(4 * ci + 2, i, j) = (a + b - cc - d) / S(2);  // HL
        out.at3(4 * ci + 3, i, j) = (a - b - cc + d) / S(2);  // HH
      }
    }
  }
  return out;
}

template <typename S>
TensorT<S> haar_unsqueeze(const TensorT<S>& x) {
  if (x.ndim() != 3) throw DimensionError("haar_unsqueeze expects (C,H,W)");
  int64_t c4 = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (c4 % 4 != 0)
    throw DimensionError(
        "haar_unsqueeze requires channel count divisible by 4, got " +
        x.shape_str());
  int64_t c = c4 / 4;
  TensorT<S> out({c, 2 * h, 2 * w});
  for (int64_t ci = 0; ci < c; ++ci) {
    for (int64_t i = 0; i < h; ++i) {
      for (int64_t j = 0; j < w; ++j) {
        S ll = x.at3(4 * ci + 0, i, j);
        S lh = x.at3(4 * ci + 1, i, j);
        S hl = x.at3(4 * ci + 2, i, j);
        S hh = x.at3(4 * ci + 3, i, j);
        out.at3(ci, 2 * i, 2 * j) = (ll + lh + hl + hh) / S(2);
        out.at3(ci, 2 * i, 2 * j + 1) = (ll - lh + hl - hh) / S(2);
        out.at3(ci, 2 * i + 1, 2 * j) = (ll + lh - hl - hh) / S(2);
        out.at3(ci, 2 * i + 1, 2 * j + 1) = (ll - lh - hl + hh) / S(2);
      }
    }
  }
  return out;
}

template <typename S>
TensorT<S> frame_to_subbands(const TensorT<S>& frame) {
  if (frame.ndim() != 3) throw DimensionError("frame_to_subbands expects (C,H,W)");
  if (frame.dim(1) % 4 != 0 || frame.dim(2) % 4 != 0)
    throw DimensionError("frame dimensions must be divisible by 4, got " +
                         frame.shape_str());
  return haar_squeeze(haar_squeeze(frame));
}

template <typename S>
TensorT<S> subbands_to_frame(const TensorT<S>& subbands) {
  return haar_unsqueeze(haar_unsqueeze(subbands));
}

template TensorT<double> haar_squeeze(const TensorT<double>&);
template TensorT<float> haar_squeeze(const TensorT<float>&);
template TensorT<double> haar_unsqueeze(const TensorT<double>&);
template TensorT<float> haar_unsqueeze(const TensorT<float>&);
template TensorT<double> frame_to_subbands(const TensorT<double>&);
template TensorT<float> frame_to_subbands(const TensorT<float>&);
template TensorT<double> subbands_to_frame(const TensorT<double>&);
template TensorT<float> subbands_to_frame(const TensorT<float>&);

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  return w;
}

std::vector<double> reflect_pad(std::span<const double> x, int pad) {
  int s = static_cast<int>(x.size());
  if (pad > 0 && s < pad + 1)
    throw DimensionError("signal too short to reflect-pad by " +
                         std::to_string(pad));
  std::vector<double> out(static_cast<size_t>(s + 2 * pad));
  for (int i = 0; i < pad; ++i) out[static_cast<size_t>(i)] = x[static_cast<size_t>(pad - i)];
  for (int i = 0; i < s; ++i) out[static_cast<size_t>(pad + i)] = x[static_cast<size_t>(i)];
  for (int i = 0; i < pad; ++i)
    out[static_cast<size_t>(pad + s + i)] = x[static_cast<size_t>(s - 2 - i)];
  return out;
}

int stft_frame_count(int chunk_len, int window_size, int hop_length) {
  int padded = chunk_len + 2 * (window_size / 2);
  if (padded < window_size) throw DimensionError("chunk shorter than the window");
  return 1 + (padded - window_size) / hop_length;
}

Spectrogram stft_chunk(std::span<const double> chunk, int window_size,
                       int hop_length) {
  int s = static_cast<int>(chunk.size());
  if (window_size < 2 || window_size % 2 != 0)
    throw DimensionError("window size must be even and >= 2");
  if (hop_length < 1) throw DimensionError("hop length must be positive");
  if (s < hop_length)
    throw DimensionError("signal too short: chunk of " + std::to_string(s) +
                         " samples is shorter than one hop");
  int pad = window_size / 2;
  std::vector<double> padded = reflect_pad(chunk, pad);
  int frames = stft_frame_count(s, window_size, hop_length);
  int bins = window_size / 2 + 1;
  std::vector<double> win = hann_window(window_size);

  Spectrogram spec;
  spec.bins = bins;
  spec.frames = frames;
  spec.data.assign(static_cast<size_t>(bins) * frames, {0.0, 0.0});

  std::vector<double> buf(static_cast<size_t>(window_size));
  for (int f = 0; f < frames; ++f) {
    const double* seg = padded.data() + static_cast<size_t>(f) * hop_length;
    for (int n = 0; n < window_size; ++n)
      buf[static_cast<size_t>(n)] = win[static_cast<size_t>(n)] * seg[n];
    for (int k = 0; k < bins; ++k) {
      double re = 0.0, im = 0.0;
      for (int n = 0; n < window_size; ++n) {
        double ang = 2.0 * kPi * k * n / window_size;
        re += buf[static_cast<size_t>(n)] * std::cos(ang);
        im -= buf[static_cast<size_t>(n)] * std::sin(ang);
      }
      spec.at(k, f) = {re, im};
    }
  }
  return spec;
}

// Real-valued inverse DFT of a one-sided spectrum. Imaginary parts of the DC
// and Nyquist bins have no effect by construction, which keeps the map linear
// and well-defined on arbitrary plane contents.
static void irfft_onesided(const std::complex<double>* spec, int bins, int n,
                           double* out) {
  for (int t = 0; t < n; ++t) out[t] = 0.0;
  for (int k = 0; k < bins; ++k) {
    double wk = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
    double re = spec[k].real(), im = spec[k].imag();
    for (int t = 0; t < n; ++t) {
      double ang = 2.0 * kPi * k * t / n;
      out[t] += wk * (re * std::cos(ang) - im * std::sin(ang));
    }
  }
  for (int t = 0; t < n; ++t) out[t] /= n;
}

std::vector<double> istft_chunk(const Spectrogram& spec,
                                const PackingLayout& layout, int out_length) {
  if (spec.bins != layout.n_fft_bins || spec.frames != layout.n_time_frames)
    throw LayoutError("spectrogram does not match layout: got " +
                      std::to_string(spec.bins) + "x" +
                      std::to_string(spec.frames) + ", layout declares " +
                      std::to_string(layout.n_fft_bins) + "x" +
                      std::to_string(layout.n_time_frames));
  int n = layout.window_size;
  int hop = layout.hop_length;
  if (layout.n_fft_bins != n / 2 + 1)
    throw LayoutError("layout bins inconsistent with window size");
  if (stft_frame_count(out_length, n, hop) != layout.n_time_frames)
    throw LayoutError("layout frame count inconsistent with output length");

  int pad = n / 2;
  int padded_len = out_length + 2 * pad;
  std::vector<double> acc(static_cast<size_t>(padded_len), 0.0);
  std::vector<double> env(static_cast<size_t>(padded_len), 0.0);
  std::vector<double> win = hann_window(n);
  std::vector<double> frame(static_cast<size_t>(n));
  std::vector<std::complex<double>> col(static_cast<size_t>(spec.bins));

  for (int f = 0; f < spec.frames; ++f) {
    for (int k = 0; k < spec.bins; ++k) col[static_cast<size_t>(k)] = spec.at(k, f);
    irfft_onesided(col.data(), spec.bins, n, frame.data());
    int off = f * hop;
    for (int t = 0; t < n; ++t) {
      acc[static_cast<size_t>(off + t)] += win[static_cast<size_t>(t)] * frame[static_cast<size_t>(t)];
      env[static_cast<size_t>(off + t)] +=
          win[static_cast<size_t>(t)] * win[static_cast<size_t>(t)];
    }
  }

  std::vector<double> out(static_cast<size_t>(out_length));
  for (int i = 0; i < out_length; ++i) {
    double e = env[static_cast<size_t>(pad + i)];
    if (e < kEnvelopeFloor)
      throw NumericError("overlap-add envelope vanishes inside the chunk");
    out[static_cast<size_t>(i)] = acc[static_cast<size_t>(pad + i)] / e;
  }
  return out;
}

Tensor stft_logmag(std::span<const double> chunk, int window_size,
                   int hop_length, double eps) {
  Spectrogram spec = stft_chunk(chunk, window_size, hop_length);
  Tensor out({1, spec.bins, spec.frames});
  for (size_t i = 0; i < spec.data.size(); ++i)
    out.data[i] = 0.5 * std::log(std::norm(spec.data[i]) + eps);
  return out;
}

Tensor pack_spectrogram(const Spectrogram& spec, int h4, int w4,
                        PackingLayout* layout) {
  int64_t slots = static_cast<int64_t>(h4) * w4;
  int64_t used = 2LL * spec.bins * spec.frames;
  if (used > slots)
    throw CapacityError("packed spectrogram needs " + std::to_string(used) +
                        " slots but the plane provides " +
                        std::to_string(slots));
  Tensor plane({1, h4, w4});
  int64_t per = static_cast<int64_t>(spec.bins) * spec.frames;
  for (int64_t i = 0; i < per; ++i) {
    plane.data[static_cast<size_t>(i)] = spec.data[static_cast<size_t>(i)].real();
    plane.data[static_cast<size_t>(per + i)] = spec.data[static_cast<size_t>(i)].imag();
  }
  if (layout) {
    layout->n_fft_bins = spec.bins;
    layout->n_time_frames = spec.frames;
    layout->real_imag_order = "real_then_imag";
    layout->pad_count = static_cast<int>(slots - used);
  }
  return plane;
}

Spectrogram unpack_spectrogram(const Tensor& plane, const PackingLayout& layout) {
  if (plane.ndim() != 3 || plane.dim(0) != 1)
    throw DimensionError("unpack expects a (1,h,w) plane");
  int64_t slots = plane.dim(1) * plane.dim(2);
  int64_t used = 2LL * layout.n_fft_bins * layout.n_time_frames;
  if (used + layout.pad_count != slots)
    throw LayoutError("layout does not describe this plane: " +
                      std::to_string(used) + " used + " +
                      std::to_string(layout.pad_count) + " pad != " +
                      std::to_string(slots) + " slots");
  if (layout.real_imag_order != "real_then_imag")
    throw LayoutError("unknown real/imag order: " + layout.real_imag_order);
  Spectrogram spec;
  spec.bins = layout.n_fft_bins;
  spec.frames = layout.n_time_frames;
  int64_t per = static_cast<int64_t>(spec.bins) * spec.frames;
  spec.data.resize(static_cast<size_t>(per));
  for (int64_t i = 0; i < per; ++i)
    spec.data[static_cast<size_t>(i)] = {plane.data[static_cast<size_t>(i)],
                                         plane.data[static_cast<size_t>(per + i)]};
  return spec;
}

int packed_slot_count(int chunk_len, int window_size, int hop_length) {
  int frames = stft_frame_count(chunk_len, window_size, hop_length);
  return 2 * (window_size / 2 + 1) * frames;
}

}  // namespace avguard
