// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/model_io.hpp"

#include <cstring>
#include <fstream>

#include "avguard/errors.hpp"

namespace avguard {

namespace {

constexpr char kMagic[4] = {'A', 'V', 'G', 'D'};
constexpr uint32_t kFormatVersion = 1;

template <typename T>
void write_raw(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ContainerError("truncated tensor-map file");
  return v;
}

}  // namespace

void write_tensor_map(const std::filesystem::path& path, const TensorMapFile& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContainerError("cannot open for writing: " + path.string());
  os.write(kMagic, 4);
  write_raw(os, kFormatVersion);
  std::string manifest = f.manifest.dump();
  write_raw(os, static_cast<uint64_t>(manifest.size()));
  os.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
  write_raw(os, static_cast<uint32_t>(f.tensors.size()));
  for (const auto& [name, t] : f.tensors) {
    write_raw(os, static_cast<uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_raw(os, static_cast<uint8_t>(t.ndim()));
    for (int64_t d : t.shape) write_raw(os, d);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
  if (!os) throw ContainerError("write failed: " + path.string());
}

TensorMapFile read_tensor_map(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContainerError("cannot open: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw ContainerError("not a tensor-map file: " + path.string());
  uint32_t version = read_raw<uint32_t>(is);
  if (version != kFormatVersion)
    throw ContainerError("unsupported tensor-map version " +
                         std::to_string(version));
  uint64_t mlen = read_raw<uint64_t>(is);
  std::string manifest(mlen, '\0');
  is.read(manifest.data(), static_cast<std::streamsize>(mlen));
  if (!is) throw ContainerError("truncated manifest");
  TensorMapFile f;
  try {
    f.manifest = nlohmann::json::parse(manifest);
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(std::string("bad manifest JSON: ") + e.what());
  }
  uint32_t count = read_raw<uint32_t>(is);
  for (uint32_t i = 0; i < count; ++i) {
    uint16_t nlen = read_raw<uint16_t>(is);
    std::string name(nlen, '\0');
    is.read(name.data(), nlen);
    uint8_t ndim = read_raw<uint8_t>(is);
    std::vector<int64_t> shape;
    for (uint8_t d = 0; d < ndim; ++d) shape.push_back(read_raw<int64_t>(is));
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!is) throw ContainerError("truncated tensor data for " + name);
    f.tensors.emplace_back(std::move(name), std::move(t));
  }
  return f;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContainerError("cannot open for digest: " + path.string());
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (is) {
    is.read(buf, sizeof(buf));
    std::streamsize got = is.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

nlohmann::json hyper_to_json(const ModelHyper& h) {
  return {
      {"inn_blocks", h.inn_blocks},
      {"subnet_growth", h.subnet_growth},
      {"subnet_layers", h.subnet_layers},
      {"leaky_slope", h.leaky_slope},
      {"feature_channels", h.feature_channels},
      {"sfe_base", h.sfe_base},
      {"frame_width", h.frame_width},
      {"frame_height", h.frame_height},
      {"fps", h.fps},
      {"sample_rate", h.sample_rate},
      {"stft_window", h.stft_window},
      {"stft_hop", h.stft_hop},
      {"localize_threshold", h.localize_threshold},
  };
}

ModelHyper hyper_from_json(const nlohmann::json& j) {
  ModelHyper h;
  h.inn_blocks = j.at("inn_blocks").get<int>();
  h.subnet_growth = j.at("subnet_growth").get<int>();
  h.subnet_layers = j.at("subnet_layers").get<int>();
  h.leaky_slope = j.at("leaky_slope").get<double>();
  h.feature_channels = j.at("feature_channels").get<int>();
  h.sfe_base = j.at("sfe_base").get<int>();
  h.frame_width = j.at("frame_width").get<int>();
  h.frame_height = j.at("frame_height").get<int>();
  h.fps = j.at("fps").get<int>();
  h.sample_rate = j.at("sample_rate").get<int>();
  h.stft_window = j.at("stft_window").get<int>();
  h.stft_hop = j.at("stft_hop").get<int>();
  h.localize_threshold = j.at("localize_threshold").get<double>();
  return h;
}

void save_checkpoint(const std::filesystem::path& path, const CmwModel& model) {
  TensorMapFile f;
  f.manifest = {{"kind", "cmw-model"}, {"hyper", hyper_to_json(model.hyper)}};
  for (const auto& [name, p] : model.named_params())
    f.tensors.emplace_back(name, p->value);
  write_tensor_map(path, f);
}

CmwModel load_checkpoint(const std::filesystem::path& path, std::string* digest) {
  TensorMapFile f = read_tensor_map(path);
  if (!f.manifest.contains("kind") || f.manifest["kind"] != "cmw-model")
    throw ContainerError("not a model checkpoint: " + path.string());
  CmwModel model(hyper_from_json(f.manifest.at("hyper")), 0);
  auto named = model.named_params();
  if (named.size() != f.tensors.size())
    throw ModelMismatchError("checkpoint has " + std::to_string(f.tensors.size()) +
                             " tensors, model expects " +
                             std::to_string(named.size()));
  for (size_t i = 0; i < named.size(); ++i) {
    auto& [want_name, p] = named[i];
    auto& [got_name, t] = f.tensors[i];
    if (want_name != got_name)
      throw ModelMismatchError("checkpoint tensor order mismatch at " + got_name);
    if (t.shape != p->value.shape)
      throw ModelMismatchError("checkpoint tensor shape mismatch at " + got_name);
    p->value = std::move(t);
  }
  if (digest) *digest = file_digest(path);
  return model;
}

}  // namespace avguard
