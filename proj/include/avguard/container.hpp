// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "avguard/pipeline.hpp"
#include "avguard/transforms.hpp"

namespace avguard {

// On-disk audiovisual container: frames/ as zero-padded numbered binary PPM
// images (lossless 8-bit), audio.wav as PCM16 mono, and a meta.json sidecar.
struct ContainerMeta {
  int format_version = 1;
  int fps = 25;
  int sample_rate = 16000;
  int width = 0;
  int height = 0;
  int n_frames = 0;
  std::string role = "original";  // original | watermarked | tampered | recovered
  std::string model_id;           // checkpoint digest, when produced by a model
  std::optional<PackingLayout> layout;

  nlohmann::json to_json() const;
  static ContainerMeta from_json(const nlohmann::json& j);
};

void write_container(const std::filesystem::path& dir, const AVStream& stream,
                     ContainerMeta meta);

// Reads and validates; throws ContainerError on structural violations.
AVStream read_container(const std::filesystem::path& dir,
                        ContainerMeta* meta_out = nullptr);

// Lone-file helpers.
void write_wav(const std::filesystem::path& path,
               std::span<const double> samples, int sample_rate);
std::vector<double> read_wav(const std::filesystem::path& path,
                             int* sample_rate = nullptr);
void write_ppm(const std::filesystem::path& path, const Tensor& frame);
Tensor read_ppm(const std::filesystem::path& path);

nlohmann::json layout_to_json(const PackingLayout& layout);
PackingLayout layout_from_json(const nlohmann::json& j);

}  // namespace avguard
