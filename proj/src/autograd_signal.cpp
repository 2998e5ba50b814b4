// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>
#include <memory>
#include <vector>

#include "avguard/autograd.hpp"
#include "avguard/errors.hpp"

namespace avguard::ag {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Batched two-way Haar rearrangement on (N,C,H,W). `analysis` selects the
// squeeze direction; the maps are mutual inverses and mutual adjoints.
Tensor haar_batched(const Tensor& x, bool analysis) {
  int64_t batch = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor out = analysis ? Tensor({batch, 4 * c, h / 2, w / 2})
                        : Tensor({batch, c / 4, 2 * h, 2 * w});
  for (int64_t n = 0; n < batch; ++n) {
    if (analysis) {
      for (int64_t ci = 0; ci < c; ++ci)
        for (int64_t i = 0; i < h / 2; ++i)
          for (int64_t j = 0; j < w / 2; ++j) {
            double a = x.at4(n, ci, 2 * i, 2 * j);
            double b = x.at4(n, ci, 2 * i, 2 * j + 1);
            double cc = x.at4(n, ci, 2 * i + 1, 2 * j);
            double d = x.at4(n, ci, 2 * i + 1, 2 * j + 1);
            out.at4(n, 4 * ci + 0, i, j) = (a + b + cc + d) / 2.0;
            out.at4(n, 4 * ci + 1, i, j) = (a - b + cc - d) / 2.0;
            out.at4(n, 4 * ci + 2, i, j) = (a + b - cc - d) / 2.0;
            out.at4(n, 4 * ci + 3, i, j) = (a - b - cc + d) / 2.0;
          }
    } else {
      for (int64_t ci = 0; ci < c / 4; ++ci)
        for (int64_t i = 0; i < h; ++i)
          for (int64_t j = 0; j < w; ++j) {
            double ll = x.at4(n, 4 * ci + 0, i, j);
            double lh = x.at4(n, 4 * ci + 1, i, j);
            double hl = x.at4(n, 4 * ci + 2, i, j);
            double hh = x.at4(n, 4 * ci + 3, i, j);
            out.at4(n, ci, 2 * i, 2 * j) = (ll + lh + hl + hh) / 2.0;
            out.at4(n, ci, 2 * i, 2 * j + 1) = (ll - lh + hl - hh) / 2.0;
            out.at4(n, ci, 2 * i + 1, 2 * j) = (ll + lh - hl - hh) / 2.0;
            out.at4(n, ci, 2 * i + 1, 2 * j + 1) = (ll - lh - hl + hh) / 2.0;
          }
    }
  }
  return out;
}

}  // namespace

VarPtr haar_squeeze_op(VarPtr x) {
  if (x->value.ndim() != 4) throw DimensionError("haar_squeeze_op expects (N,C,H,W)");
  if (x->value.dim(2) % 2 != 0 || x->value.dim(3) % 2 != 0)
    throw DimensionError("haar_squeeze_op requires even spatial dimensions");
  auto node = make_op_node(haar_batched(x->value, true), {x});
  if (node->requires_grad) {
    Node* pn = node.get();
    Node* px = x.get();
    node->backward_fn = [pn, px] {
      // orthonormal: adjoint equals inverse
      px->accumulate(haar_batched(pn->grad, false));
    };
  }
  return node;
}

VarPtr haar_unsqueeze_op(VarPtr x) {
  if (x->value.ndim() != 4) throw DimensionError("haar_unsqueeze_op expects (N,C,H,W)");
  if (x->value.dim(1) % 4 != 0)
    throw DimensionError("haar_unsqueeze_op requires channels divisible by 4");
  auto node = make_op_node(haar_batched(x->value, false), {x});
  if (node->requires_grad) {
    Node* pn = node.get();
    Node* px = x.get();
    node->backward_fn = [pn, px] { px->accumulate(haar_batched(pn->grad, true)); };
  }
  return node;
}

VarPtr istft_op(VarPtr plane, const PackingLayout& layout, int out_length) {
  if (plane->value.ndim() != 4 || plane->value.dim(1) != 1)
    throw DimensionError("istft_op expects (N,1,h,w) planes");
  int64_t batch = plane->value.dim(0);
  int64_t slots = plane->value.dim(2) * plane->value.dim(3);
  int bins = layout.n_fft_bins, frames = layout.n_time_frames;
  if (2LL * bins * frames + layout.pad_count != slots)
    throw LayoutError("istft_op: layout does not match plane size");
  int n = layout.window_size, hop = layout.hop_length;
  int pad = n / 2;
  int padded_len = out_length + 2 * pad;
  std::vector<double> win = hann_window(n);

  // window-square overlap envelope; constant for the layout
  std::vector<double> env(static_cast<size_t>(padded_len), 0.0);
  for (int f = 0; f < frames; ++f)
    for (int t = 0; t < n; ++t)
      env[static_cast<size_t>(f * hop + t)] +=
          win[static_cast<size_t>(t)] * win[static_cast<size_t>(t)];
  for (int i = 0; i < out_length; ++i)
    if (env[static_cast<size_t>(pad + i)] < 1e-10)
      throw NumericError("istft_op: overlap-add envelope vanishes");

  int64_t per = static_cast<int64_t>(bins) * frames;
  Tensor out({batch, out_length});
  for (int64_t bn = 0; bn < batch; ++bn) {
    const double* re = &plane->value.data[static_cast<size_t>(bn * slots)];
    const double* im = re + per;
    std::vector<double> acc(static_cast<size_t>(padded_len), 0.0);
    for (int f = 0; f < frames; ++f) {
      for (int t = 0; t < n; ++t) {
        double v = 0.0;
        for (int k = 0; k < bins; ++k) {
          double wk = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
          double ang = 2.0 * kPi * k * t / n;
          v += wk * (re[static_cast<size_t>(k) * frames + f] * std::cos(ang) -
                     im[static_cast<size_t>(k) * frames + f] * std::sin(ang));
        }
        acc[static_cast<size_t>(f * hop + t)] += win[static_cast<size_t>(t)] * v / n;
      }
    }
    for (int i = 0; i < out_length; ++i)
      out.data[static_cast<size_t>(bn * out_length + i)] =
          acc[static_cast<size_t>(pad + i)] / env[static_cast<size_t>(pad + i)];
  }

  auto node = make_op_node(std::move(out), {plane});
  if (node->requires_grad) {
    Node* pn = node.get();
    Node* pp = plane.get();
    auto env_c = std::make_shared<std::vector<double>>(std::move(env));
    auto win_c = std::make_shared<std::vector<double>>(std::move(win));
    node->backward_fn = [pn, pp, env_c, win_c, batch, slots, per, bins, frames,
                         n, hop, pad, out_length, padded_len] {
      Tensor& g = pp->ensure_grad();
      for (int64_t bn = 0; bn < batch; ++bn) {
        std::vector<double> dacc(static_cast<size_t>(padded_len), 0.0);
        for (int i = 0; i < out_length; ++i)
          dacc[static_cast<size_t>(pad + i)] =
              pn->grad.data[static_cast<size_t>(bn * out_length + i)] /
              (*env_c)[static_cast<size_t>(pad + i)];
        double* dre = &g.data[static_cast<size_t>(bn * slots)];
        double* dim = dre + per;
        for (int f = 0; f < frames; ++f) {
          for (int k = 0; k < bins; ++k) {
            double wk = (k == 0 || 2 * k == n) ? 1.0 : 2.0;
            double sre = 0.0, sim = 0.0;
            for (int t = 0; t < n; ++t) {
              double dv = (*win_c)[static_cast<size_t>(t)] *
                          dacc[static_cast<size_t>(f * hop + t)] / n;
              double ang = 2.0 * kPi * k * t / n;
              sre += dv * std::cos(ang);
              sim -= dv * std::sin(ang);
            }
            dre[static_cast<size_t>(k) * frames + f] += wk * sre;
            dim[static_cast<size_t>(k) * frames + f] += wk * sim;
          }
        }
      }
    };
  }
  return node;
}

VarPtr stft_logmag_op(VarPtr wave, int window_size, int hop_length, double eps) {
  if (wave->value.ndim() != 2) throw DimensionError("stft_logmag_op expects (N,S)");
  int64_t batch = wave->value.dim(0);
  int s = static_cast<int>(wave->value.dim(1));
  int pad = window_size / 2;
  int frames = stft_frame_count(s, window_size, hop_length);
  int bins = window_size / 2 + 1;
  std::vector<double> win = hann_window(window_size);

  // keep (re, im, power) for the backward pass
  auto spec_re = std::make_shared<std::vector<double>>(
      static_cast<size_t>(batch * bins * frames));
  auto spec_im = std::make_shared<std::vector<double>>(
      static_cast<size_t>(batch * bins * frames));
  Tensor out({batch, 1, bins, frames});

  for (int64_t bn = 0; bn < batch; ++bn) {
    std::span<const double> chunk(&wave->value.data[static_cast<size_t>(bn * s)],
                                  static_cast<size_t>(s));
    std::vector<double> padded = reflect_pad(chunk, pad);
    for (int f = 0; f < frames; ++f) {
      const double* seg = padded.data() + static_cast<size_t>(f) * hop_length;
      for (int k = 0; k < bins; ++k) {
        double re = 0.0, im = 0.0;
        for (int t = 0; t < window_size; ++t) {
          double v = win[static_cast<size_t>(t)] * seg[t];
          double ang = 2.0 * kPi * k * t / window_size;
          re += v * std::cos(ang);
          im -= v * std::sin(ang);
        }
        size_t idx = static_cast<size_t>((bn * bins + k) * frames + f);
        (*spec_re)[idx] = re;
        (*spec_im)[idx] = im;
        out.data[idx] = 0.5 * std::log(re * re + im * im + eps);
      }
    }
  }

  auto node = make_op_node(std::move(out), {wave});
  if (node->requires_grad) {
    Node* pn = node.get();
    Node* pw = wave.get();
    auto win_c = std::make_shared<std::vector<double>>(std::move(win));
    node->backward_fn = [pn, pw, spec_re, spec_im, win_c, batch, s, pad, frames,
                         bins, window_size, hop_length, eps] {
      Tensor& g = pw->ensure_grad();
      int padded_len = s + 2 * pad;
      for (int64_t bn = 0; bn < batch; ++bn) {
        std::vector<double> dpad(static_cast<size_t>(padded_len), 0.0);
        for (int f = 0; f < frames; ++f) {
          for (int k = 0; k < bins; ++k) {
            size_t idx = static_cast<size_t>((bn * bins + k) * frames + f);
            double re = (*spec_re)[idx], im = (*spec_im)[idx];
            double dl = pn->grad.data[idx] * 0.5 / (re * re + im * im + eps);
            double dre = dl * 2.0 * re;
            double dim = dl * 2.0 * im;
            if (dre == 0.0 && dim == 0.0) continue;
            for (int t = 0; t < window_size; ++t) {
              double ang = 2.0 * kPi * k * t / window_size;
              dpad[static_cast<size_t>(f * hop_length + t)] +=
                  (*win_c)[static_cast<size_t>(t)] *
                  (dre * std::cos(ang) - dim * std::sin(ang));
            }
          }
        }
        // fold the reflect padding back
        double* dst = &g.data[static_cast<size_t>(bn * s)];
        for (int i = 0; i < s; ++i) dst[i] += dpad[static_cast<size_t>(pad + i)];
        for (int i = 0; i < pad; ++i) dst[pad - i] += dpad[static_cast<size_t>(i)];
        for (int i = 0; i < pad; ++i)
          dst[s - 2 - i] += dpad[static_cast<size_t>(pad + s + i)];
      }
    };
  }
  return node;
}

}  // namespace avguard::ag
