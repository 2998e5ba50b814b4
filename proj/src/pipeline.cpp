// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "avguard/errors.hpp"
#include "avguard/parallel.hpp"

namespace avguard {

void validate_stream(const AVStream& stream) {
  if (stream.fps <= 0 || stream.sample_rate <= 0)
    throw DimensionError("stream rates must be positive");
  if (stream.sample_rate % stream.fps != 0)
    throw DimensionError("sample_rate must be an integer multiple of fps");
  int64_t want = static_cast<int64_t>(stream.frames.size()) * stream.chunk_samples();
  if (static_cast<int64_t>(stream.audio.size()) != want)
    throw DimensionError("audio/frame alignment: expected " +
                         std::to_string(want) + " samples for " +
                         std::to_string(stream.frames.size()) + " frames, got " +
                         std::to_string(stream.audio.size()));
  for (const Tensor& f : stream.frames)
    if (f.ndim() != 3 || f.dim(0) != 3 || !f.same_shape(stream.frames[0]))
      throw DimensionError("frames must all be (3,H,W) with a common size");
}

std::vector<AVSegmentView> segment_stream(const AVStream& stream) {
  validate_stream(stream);
  int s = stream.chunk_samples();
  std::vector<AVSegmentView> out;
  out.reserve(stream.frames.size());
  for (size_t i = 0; i < stream.frames.size(); ++i) {
    out.push_back({&stream.frames[i],
                   std::span<const double>(stream.audio.data() + i * static_cast<size_t>(s),
                                           static_cast<size_t>(s)),
                   static_cast<int>(i)});
  }
  return out;
}

namespace {

void quantize8_inplace(Tensor& frame) {
  for (auto& v : frame.data) v = std::round(v * 255.0) / 255.0;
}

void clamp01_inplace(Tensor& frame) {
  for (auto& v : frame.data) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

EmbedResult embed(const AVStream& stream, const StackWeights<double>& stack,
                  int stft_window, int stft_hop, const EmbedOptions& opts) {
  auto segments = segment_stream(stream);
  if (segments.empty()) throw DimensionError("embed: empty stream");
  int64_t h4 = stream.frame_height() / 4;
  int64_t w4 = stream.frame_width() / 4;
  int needed = packed_slot_count(stream.chunk_samples(), stft_window, stft_hop);
  if (needed > h4 * w4)
    throw CapacityError("embed: packed spectrogram needs " +
                        std::to_string(needed) + " slots but the frame offers " +
                        std::to_string(h4 * w4));

  EmbedResult result;
  result.frames.resize(segments.size());
  if (opts.keep_latents) result.audio_latents.resize(segments.size());

  PackingLayout layout;
  layout.window_size = stft_window;
  layout.hop_length = stft_hop;
  {
    Spectrogram probe = stft_chunk(segments[0].chunk, stft_window, stft_hop);
    pack_spectrogram(probe, static_cast<int>(h4), static_cast<int>(w4), &layout);
  }
  result.layout = layout;

  parallel_for(static_cast<int64_t>(segments.size()), [&](int64_t i) {
    const auto& seg = segments[static_cast<size_t>(i)];
    Tensor vis = frame_to_subbands(*seg.frame);
    Spectrogram spec = stft_chunk(seg.chunk, stft_window, stft_hop);
    Tensor aud = pack_spectrogram(spec, static_cast<int>(h4),
                                  static_cast<int>(w4), nullptr);
    stack_forward_eval(stack, vis, aud);
    Tensor wm = subbands_to_frame(vis);
    if (opts.clamp) clamp01_inplace(wm);
    if (opts.quantize) quantize8_inplace(wm);
    result.frames[static_cast<size_t>(i)] = std::move(wm);
    if (opts.keep_latents)
      result.audio_latents[static_cast<size_t>(i)] = std::move(aud);
  });
  return result;
}

namespace {

RecoverResult recover_impl(const std::vector<Tensor>& frames,
                           const StackWeights<double>& stack,
                           const SubnetWeights<double>* estimator,
                           const std::vector<Tensor>* latents,
                           const PackingLayout& layout, int chunk_samples) {
  if (frames.empty()) throw DimensionError("recover: no frames");
  int64_t h4 = frames[0].dim(1) / 4;
  int64_t w4 = frames[0].dim(2) / 4;
  if (2LL * layout.n_fft_bins * layout.n_time_frames + layout.pad_count != h4 * w4)
    throw LayoutError("recover: layout does not match the frame resolution");
  if (stft_frame_count(chunk_samples, layout.window_size, layout.hop_length) !=
      layout.n_time_frames)
    throw LayoutError("recover: layout frame count inconsistent with chunk size");

  RecoverResult result;
  result.frames.resize(frames.size());
  result.audio.assign(frames.size() * static_cast<size_t>(chunk_samples), 0.0);

  parallel_for(static_cast<int64_t>(frames.size()), [&](int64_t i) {
    Tensor vis = frame_to_subbands(frames[static_cast<size_t>(i)]);
    Tensor aud = latents ? (*latents)[static_cast<size_t>(i)]
                         : subnet_eval(*estimator, vis);
    stack_inverse_eval(stack, vis, aud);
    Tensor rec = subbands_to_frame(vis);
    clamp01_inplace(rec);
    result.frames[static_cast<size_t>(i)] = std::move(rec);
    Spectrogram spec = unpack_spectrogram(aud, layout);
    std::vector<double> chunk = istft_chunk(spec, layout, chunk_samples);
    std::copy(chunk.begin(), chunk.end(),
              result.audio.begin() +
                  static_cast<size_t>(i) * static_cast<size_t>(chunk_samples));
  });
  return result;
}

}  // namespace

RecoverResult recover(const std::vector<Tensor>& frames,
                      const StackWeights<double>& stack,
                      const SubnetWeights<double>& estimator,
                      const PackingLayout& layout, int chunk_samples) {
  return recover_impl(frames, stack, &estimator, nullptr, layout, chunk_samples);
}

RecoverResult recover_with_latents(const std::vector<Tensor>& frames,
                                   const StackWeights<double>& stack,
                                   const std::vector<Tensor>& latents,
                                   const PackingLayout& layout,
                                   int chunk_samples) {
  if (latents.size() != frames.size())
    throw DimensionError("recover_with_latents: latent count mismatch");
  return recover_impl(frames, stack, nullptr, &latents, layout, chunk_samples);
}

}  // namespace avguard
