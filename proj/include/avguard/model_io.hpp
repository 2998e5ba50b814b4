// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "avguard/model.hpp"

namespace avguard {

// On-disk tensor-map container: a JSON manifest followed by named float64
// tensors with declared shapes, all little-endian. Shared by model
// checkpoints and optimizer state files.
struct TensorMapFile {
  nlohmann::json manifest;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

void write_tensor_map(const std::filesystem::path& path, const TensorMapFile& f);
TensorMapFile read_tensor_map(const std::filesystem::path& path);

// FNV-1a 64-bit digest of the file bytes, as a hex string. Used as the
// model identity recorded in container sidecars.
std::string file_digest(const std::filesystem::path& path);

nlohmann::json hyper_to_json(const ModelHyper& h);
ModelHyper hyper_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const CmwModel& model);
CmwModel load_checkpoint(const std::filesystem::path& path,
                         std::string* digest = nullptr);

}  // namespace avguard
