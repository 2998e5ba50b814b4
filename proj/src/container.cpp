// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/container.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "avguard/errors.hpp"

namespace avguard {

namespace fs = std::filesystem;

nlohmann::json layout_to_json(const PackingLayout& layout) {
  return {{"n_fft_bins", layout.n_fft_bins},
          {"n_time_frames", layout.n_time_frames},
          {"real_imag_order", layout.real_imag_order},
          {"pad_count", layout.pad_count},
          {"window_size", layout.window_size},
          {"hop_length", layout.hop_length}};
}

PackingLayout layout_from_json(const nlohmann::json& j) {
  PackingLayout layout;
  layout.n_fft_bins = j.at("n_fft_bins").get<int>();
  layout.n_time_frames = j.at("n_time_frames").get<int>();
  layout.real_imag_order = j.at("real_imag_order").get<std::string>();
  layout.pad_count = j.at("pad_count").get<int>();
  layout.window_size = j.at("window_size").get<int>();
  layout.hop_length = j.at("hop_length").get<int>();
  return layout;
}

nlohmann::json ContainerMeta::to_json() const {
  nlohmann::json j = {{"format_version", format_version},
                      {"fps", fps},
                      {"sample_rate", sample_rate},
                      {"width", width},
                      {"height", height},
                      {"n_frames", n_frames},
                      {"role", role}};
  if (!model_id.empty()) j["model_id"] = model_id;
  if (layout) j["layout"] = layout_to_json(*layout);
  return j;
}

ContainerMeta ContainerMeta::from_json(const nlohmann::json& j) {
  ContainerMeta m;
  try {
    m.format_version = j.at("format_version").get<int>();
    m.fps = j.at("fps").get<int>();
    m.sample_rate = j.at("sample_rate").get<int>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.n_frames = j.at("n_frames").get<int>();
    m.role = j.at("role").get<std::string>();
    if (j.contains("model_id")) m.model_id = j.at("model_id").get<std::string>();
    if (j.contains("layout")) m.layout = layout_from_json(j.at("layout"));
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(std::string("bad sidecar: ") + e.what());
  }
  if (m.format_version != 1)
    throw ContainerError("unsupported container format version " +
                         std::to_string(m.format_version));
  return m;
}

void write_ppm(const fs::path& path, const Tensor& frame) {
  if (frame.ndim() != 3 || frame.dim(0) != 3)
    throw DimensionError("write_ppm expects a (3,H,W) frame");
  int64_t h = frame.dim(1), w = frame.dim(2);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContainerError("cannot write frame: " + path.string());
  os << "P6\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
  for (int64_t i = 0; i < h; ++i) {
    for (int64_t j = 0; j < w; ++j)
      for (int64_t c = 0; c < 3; ++c) {
        double v = std::clamp(frame.at3(c, i, j), 0.0, 1.0);
        row[static_cast<size_t>(j * 3 + c)] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw ContainerError("short write: " + path.string());
}

Tensor read_ppm(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContainerError("cannot read frame: " + path.string());
  std::string magic;
  is >> magic;
  if (magic != "P6") throw ContainerError("not a binary PPM: " + path.string());
  int64_t w = 0, h = 0;
  int maxval = 0;
  is >> w >> h >> maxval;
  if (maxval != 255)
    throw ContainerError("unsupported PPM depth in " + path.string());
  is.get();  // single whitespace after the header
  Tensor frame({3, h, w});
  std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
  for (int64_t i = 0; i < h; ++i) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size()));
    if (!is) throw ContainerError("truncated PPM: " + path.string());
    for (int64_t j = 0; j < w; ++j)
      for (int64_t c = 0; c < 3; ++c)
        frame.at3(c, i, j) = row[static_cast<size_t>(j * 3 + c)] / 255.0;
  }
  return frame;
}

namespace {

template <typename T>
void put_le(std::ofstream& os, T v) {
  unsigned char buf[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<unsigned char>((static_cast<uint64_t>(v) >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::ifstream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

void write_wav(const fs::path& path, std::span<const double> samples,
               int sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContainerError("cannot write wav: " + path.string());
  uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  put_le<uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_le<uint32_t>(os, 16);
  put_le<uint16_t>(os, 1);  // PCM
  put_le<uint16_t>(os, 1);  // mono
  put_le<uint32_t>(os, static_cast<uint32_t>(sample_rate));
  put_le<uint32_t>(os, static_cast<uint32_t>(sample_rate * 2));
  put_le<uint16_t>(os, 2);
  put_le<uint16_t>(os, 16);
  os.write("data", 4);
  put_le<uint32_t>(os, data_bytes);
  for (double v : samples) {
    double clamped = std::clamp(v, -1.0, 1.0);
    int s = static_cast<int>(std::lround(clamped * 32767.0));
    put_le<int16_t>(os, static_cast<int16_t>(s));
  }
  if (!os) throw ContainerError("short wav write: " + path.string());
}

std::vector<double> read_wav(const fs::path& path, int* sample_rate) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContainerError("cannot read wav: " + path.string());
  char tag[4];
  is.read(tag, 4);
  if (!is || std::memcmp(tag, "RIFF", 4) != 0)
    throw ContainerError("not a RIFF file: " + path.string());
  get_le<uint32_t>(is);
  is.read(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0)
    throw ContainerError("not a WAVE file: " + path.string());

  int sr = 0;
  uint16_t channels = 0, bits = 0;
  std::vector<double> samples;
  while (is.read(tag, 4)) {
    uint32_t size = get_le<uint32_t>(is);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      uint16_t fmt = get_le<uint16_t>(is);
      channels = get_le<uint16_t>(is);
      sr = static_cast<int>(get_le<uint32_t>(is));
      get_le<uint32_t>(is);
      get_le<uint16_t>(is);
      bits = get_le<uint16_t>(is);
      if (fmt != 1 || channels != 1 || bits != 16)
        throw ContainerError("expected 16-bit mono PCM: " + path.string());
      if (size > 16) is.seekg(size - 16, std::ios::cur);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      samples.resize(size / 2);
      for (auto& v : samples) v = get_le<int16_t>(is) / 32767.0;
      if (!is) throw ContainerError("truncated wav data: " + path.string());
      break;
    } else {
      is.seekg(size, std::ios::cur);
    }
  }
  if (sr == 0) throw ContainerError("wav missing fmt chunk: " + path.string());
  if (sample_rate) *sample_rate = sr;
  return samples;
}

namespace {

std::string frame_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d.ppm", index);
  return buf;
}

}  // namespace

void write_container(const fs::path& dir, const AVStream& stream,
                     ContainerMeta meta) {
  validate_stream(stream);
  fs::create_directories(dir / "frames");
  meta.fps = stream.fps;
  meta.sample_rate = stream.sample_rate;
  meta.width = static_cast<int>(stream.frame_width());
  meta.height = static_cast<int>(stream.frame_height());
  meta.n_frames = static_cast<int>(stream.frames.size());
  for (size_t i = 0; i < stream.frames.size(); ++i)
    write_ppm(dir / "frames" / frame_name(static_cast<int>(i)), stream.frames[i]);
  write_wav(dir / "audio.wav", stream.audio, stream.sample_rate);
  std::ofstream os(dir / "meta.json");
  if (!os) throw ContainerError("cannot write sidecar in " + dir.string());
  os << meta.to_json().dump(2) << "\n";
}

AVStream read_container(const fs::path& dir, ContainerMeta* meta_out) {
  fs::path meta_path = dir / "meta.json";
  if (!fs::exists(meta_path))
    throw ContainerError("missing sidecar: " + meta_path.string());
  nlohmann::json j;
  {
    std::ifstream is(meta_path);
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ContainerError(std::string("bad sidecar JSON: ") + e.what());
    }
  }
  ContainerMeta meta = ContainerMeta::from_json(j);

  AVStream stream;
  stream.fps = meta.fps;
  stream.sample_rate = meta.sample_rate;
  int sr = 0;
  stream.audio = read_wav(dir / "audio.wav", &sr);
  if (sr != meta.sample_rate)
    throw ContainerError("sidecar sample_rate disagrees with audio.wav");
  stream.frames.reserve(static_cast<size_t>(meta.n_frames));
  for (int i = 0; i < meta.n_frames; ++i) {
    Tensor f = read_ppm(dir / "frames" / frame_name(i));
    if (f.dim(1) != meta.height || f.dim(2) != meta.width)
      throw ContainerError("frame size disagrees with sidecar: " + frame_name(i));
    stream.frames.push_back(std::move(f));
  }

  if (meta.fps <= 0 || meta.sample_rate % meta.fps != 0)
    throw ContainerError("sidecar rates violate integer chunking");
  int64_t want =
      static_cast<int64_t>(meta.n_frames) * (meta.sample_rate / meta.fps);
  if (static_cast<int64_t>(stream.audio.size()) != want)
    throw ContainerError(
        "container violates the frame/sample invariant: expected " +
        std::to_string(want) + " samples, found " +
        std::to_string(stream.audio.size()));

  if (meta_out) *meta_out = meta;
  return stream;
}

}  // namespace avguard
