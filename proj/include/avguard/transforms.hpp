// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "avguard/tensor.hpp"

namespace avguard {

// One-sided complex spectrogram, row-major (bin, frame).
struct Spectrogram {
  int bins = 0;
  int frames = 0;
  std::vector<std::complex<double>> data;

  std::complex<double>& at(int b, int f) {
    return data[static_cast<size_t>(b) * frames + f];
  }
  std::complex<double> at(int b, int f) const {
    return data[static_cast<size_t>(b) * frames + f];
  }
};

// Describes how a spectrogram was produced and laid out in a plane, so the
// inverse is reconstructible from the record alone.
struct PackingLayout {
  int n_fft_bins = 0;
  int n_time_frames = 0;
  std::string real_imag_order = "real_then_imag";
  int pad_count = 0;
  int window_size = 0;
  int hop_length = 0;

  bool operator==(const PackingLayout&) const = default;
};

// ---- wavelet squeezing -----------------------------------------------------

// Orthonormal 2x2 Haar analysis per channel: (C,H,W) -> (4C,H/2,W/2),
// output channel order LL, LH, HL, HH per input channel. Energy preserving.
template <typename S>
TensorT<S> haar_squeeze(const TensorT<S>& x);

// Exact inverse of haar_squeeze: (4C,H,W) -> (C,2H,2W).
template <typename S>
TensorT<S> haar_unsqueeze(const TensorT<S>& x);

// Two successive squeeze levels: (C,H,W) -> (16C,H/4,W/4). H, W must be
// divisible by 4. For a 3-channel frame this yields the 48-channel subbands.
template <typename S>
TensorT<S> frame_to_subbands(const TensorT<S>& frame);

template <typename S>
TensorT<S> subbands_to_frame(const TensorT<S>& subbands);

// ---- STFT ------------------------------------------------------------------

// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

// Reflect-pads by `pad` on both sides (no edge repeat).
std::vector<double> reflect_pad(std::span<const double> x, int pad);

// Frame count for a chunk of length s under center padding by window/2.
int stft_frame_count(int chunk_len, int window_size, int hop_length);

// One-sided STFT with periodic Hann window and center reflection padding.
// bins = window_size/2 + 1; window_size must be even.
Spectrogram stft_chunk(std::span<const double> chunk, int window_size,
                       int hop_length);

// Weighted overlap-add inverse; exact wherever the window-square envelope is
// positive. out_length is the unpadded chunk length.
std::vector<double> istft_chunk(const Spectrogram& spec,
                                const PackingLayout& layout, int out_length);

// Log-magnitude plane 0.5*ln(|X|^2 + eps), shaped (1,bins,frames). Matches
// the training-side graph op bit for bit.
Tensor stft_logmag(std::span<const double> chunk, int window_size,
                   int hop_length, double eps = 1e-8);

// ---- plane packing ----------------------------------------------------------

// Writes real parts then imaginary parts in row-major (bin, frame) order into
// a (1,h4,w4) plane, zero-padding the remainder. Fills *layout (window/hop
// fields are preserved from the passed-in value).
Tensor pack_spectrogram(const Spectrogram& spec, int h4, int w4,
                        PackingLayout* layout);

Spectrogram unpack_spectrogram(const Tensor& plane, const PackingLayout& layout);

// Required plane slots for a chunk under the given STFT settings.
int packed_slot_count(int chunk_len, int window_size, int hop_length);

}  // namespace avguard
