// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/config.hpp"

#include <fstream>
#include <sstream>

#include "avguard/errors.hpp"

namespace avguard {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
  }
}

int64_t to_i64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    int64_t r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
}

std::vector<Box> parse_boxes(const std::string& key, const std::string& v) {
  std::vector<Box> boxes;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    Box b;
    if (std::sscanf(item.c_str(), "%d,%d,%d,%d", &b.x, &b.y, &b.w, &b.h) != 4)
      throw ConfigError("config key '" + key + "': expected x,y,w,h; got '" +
                        item + "'");
    boxes.push_back(b);
  }
  return boxes;
}

}  // namespace

ModelHyper ExperimentConfig::hyper() const {
  ModelHyper h;
  h.inn_blocks = inn_blocks;
  h.subnet_growth = subnet_growth;
  h.feature_channels = feature_channels;
  h.sfe_base = sfe_base;
  h.frame_width = frame_width;
  h.frame_height = frame_height;
  h.fps = fps;
  h.sample_rate = sample_rate;
  h.stft_window = stft_window;
  h.stft_hop = stft_hop;
  return h;
}

void ExperimentConfig::validate() const {
  if (fps <= 0) throw ConfigError("fps must be positive");
  if (sample_rate <= 0 || sample_rate % fps != 0)
    throw ConfigError("sample_rate must be a positive multiple of fps");
  if (frame_width % 4 != 0 || frame_height % 4 != 0)
    throw ConfigError("frame dimensions must be divisible by 4");
  if (stft_window < 2 || stft_window % 2 != 0)
    throw ConfigError("stft_window must be even and >= 2");
  if (stft_hop < 1 || stft_hop > stft_window)
    throw ConfigError("stft_hop must be in [1, stft_window]");
  if (inn_blocks < 1) throw ConfigError("inn_blocks must be >= 1");
  if (train.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (train.iterations < 0) throw ConfigError("iterations must be >= 0");
  if (train.queue_capacity < 1) throw ConfigError("queue_capacity must be >= 1");
  if (weights.tau <= 0) throw ConfigError("tau must be positive");
  if (weights.lambda_wl < 0 || weights.lambda_vrl < 0 || weights.lambda_arl < 0 ||
      weights.lambda_sfcl < 0)
    throw ConfigError("loss weights must be nonnegative");
  if (mask.rect_count_min < 1 || mask.rect_count_max < mask.rect_count_min)
    throw ConfigError("mask rect count range is invalid");
  if (mask.side_min < 1 || mask.side_max < mask.side_min)
    throw ConfigError("mask side range is invalid");
  if (median_width < 1 || median_width % 2 == 0)
    throw ConfigError("median_width must be odd and >= 1");
  if (min_run < 1) throw ConfigError("min_run must be >= 1");
  if (tamper.audio_mode != TamperPlan::AudioMode::kNone)
    validate_plan(tamper);
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));

    if (key == "dataset_dir") cfg.dataset_dir = value;
    else if (key == "val_dir") cfg.val_dir = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "checkpoint") cfg.checkpoint = value;
    else if (key == "input_dir") cfg.input_dir = value;
    else if (key == "original_dir") cfg.original_dir = value;
    else if (key == "donor_dir") cfg.donor_dir = value;
    else if (key == "ground_truth") cfg.ground_truth = value;
    else if (key == "recovered_audio") cfg.recovered_audio = value;
    else if (key == "watermarked_dir") cfg.watermarked_dir = value;
    else if (key == "report") cfg.report = value;
    else if (key == "frame_width") cfg.frame_width = to_int(key, value);
    else if (key == "frame_height") cfg.frame_height = to_int(key, value);
    else if (key == "fps") cfg.fps = to_int(key, value);
    else if (key == "sample_rate") cfg.sample_rate = to_int(key, value);
    else if (key == "stft_window") cfg.stft_window = to_int(key, value);
    else if (key == "stft_hop") cfg.stft_hop = to_int(key, value);
    else if (key == "inn_blocks") cfg.inn_blocks = to_int(key, value);
    else if (key == "subnet_growth") cfg.subnet_growth = to_int(key, value);
    else if (key == "feature_channels") cfg.feature_channels = to_int(key, value);
    else if (key == "sfe_base") cfg.sfe_base = to_int(key, value);
    else if (key == "learning_rate") cfg.train.learning_rate = to_double(key, value);
    else if (key == "adam_beta1") cfg.train.beta1 = to_double(key, value);
    else if (key == "adam_beta2") cfg.train.beta2 = to_double(key, value);
    else if (key == "iterations") cfg.train.iterations = to_int(key, value);
    else if (key == "batch_size") cfg.train.batch_size = to_int(key, value);
    else if (key == "queue_capacity") cfg.train.queue_capacity = to_i64(key, value);
    else if (key == "quantize") cfg.train.quantize = to_bool(key, value);
    else if (key == "checkpoint_interval") cfg.train.checkpoint_interval = to_int(key, value);
    else if (key == "validation_interval") cfg.train.validation_interval = to_int(key, value);
    else if (key == "log_interval") cfg.train.log_interval = to_int(key, value);
    else if (key == "lambda_wl") cfg.weights.lambda_wl = to_double(key, value);
    else if (key == "lambda_vrl") cfg.weights.lambda_vrl = to_double(key, value);
    else if (key == "lambda_arl") cfg.weights.lambda_arl = to_double(key, value);
    else if (key == "lambda_sfcl") cfg.weights.lambda_sfcl = to_double(key, value);
    else if (key == "tau") cfg.weights.tau = to_double(key, value);
    else if (key == "mask_mode") {
      if (value == "none") cfg.mask.mode = MaskSpec::Mode::kNone;
      else if (value == "random_rects") cfg.mask.mode = MaskSpec::Mode::kRandomRects;
      else if (value == "region_boxes") cfg.mask.mode = MaskSpec::Mode::kRegionBoxes;
      else throw ConfigError("mask_mode must be none|random_rects|region_boxes");
    }
    else if (key == "mask_rect_count_min") cfg.mask.rect_count_min = to_int(key, value);
    else if (key == "mask_rect_count_max") cfg.mask.rect_count_max = to_int(key, value);
    else if (key == "mask_side_min") cfg.mask.side_min = to_int(key, value);
    else if (key == "mask_side_max") cfg.mask.side_max = to_int(key, value);
    else if (key == "mask_region_boxes") cfg.mask.region_boxes = parse_boxes(key, value);
    else if (key == "resume") cfg.resume = to_bool(key, value);
    else if (key == "tamper_audio_mode") {
      if (value == "none") cfg.tamper.audio_mode = TamperPlan::AudioMode::kNone;
      else if (value == "swap") cfg.tamper.audio_mode = TamperPlan::AudioMode::kSwap;
      else if (value == "substitute") cfg.tamper.audio_mode = TamperPlan::AudioMode::kSubstitute;
      else throw ConfigError("tamper_audio_mode must be none|swap|substitute");
    }
    else if (key == "tamper_fraction") cfg.tamper.fraction = to_double(key, value);
    else if (key == "tamper_generator") {
      if (value == "noise") cfg.tamper.generator = TamperPlan::Generator::kNoise;
      else if (value == "tone") cfg.tamper.generator = TamperPlan::Generator::kTone;
      else if (value == "shuffle") cfg.tamper.generator = TamperPlan::Generator::kShuffle;
      else throw ConfigError("tamper_generator must be noise|tone|shuffle");
    }
    else if (key == "tamper_visual_mode") {
      if (value == "none") cfg.tamper.visual_mode = TamperPlan::VisualMode::kNone;
      else if (value == "region_replace") cfg.tamper.visual_mode = TamperPlan::VisualMode::kRegionReplace;
      else if (value == "region_noise") cfg.tamper.visual_mode = TamperPlan::VisualMode::kRegionNoise;
      else throw ConfigError("tamper_visual_mode must be none|region_replace|region_noise");
    }
    else if (key == "tamper_box") {
      std::vector<Box> b = parse_boxes(key, value);
      if (b.size() != 1) throw ConfigError("tamper_box expects one x,y,w,h");
      cfg.tamper.box_x = b[0].x;
      cfg.tamper.box_y = b[0].y;
      cfg.tamper.box_w = b[0].w;
      cfg.tamper.box_h = b[0].h;
    }
    else if (key == "tamper_all_frames") cfg.tamper.visual_all_frames = to_bool(key, value);
    else if (key == "median_width") cfg.median_width = to_int(key, value);
    else if (key == "min_run") cfg.min_run = to_int(key, value);
    else if (key == "localize_threshold") cfg.localize_threshold = to_double(key, value);
    else if (key == "n_clips") cfg.synth.n_clips = to_int(key, value);
    else if (key == "clip_duration_s") cfg.synth.duration_s = to_double(key, value);
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(to_i64(key, value));
    else
      throw ConfigError("unknown config key '" + key + "'");
  }
  cfg.train.seed = cfg.seed;
  cfg.tamper.seed = cfg.seed;
  cfg.synth.seed = cfg.seed;
  cfg.synth.width = cfg.frame_width;
  cfg.synth.height = cfg.frame_height;
  cfg.synth.fps = cfg.fps;
  cfg.synth.sample_rate = cfg.sample_rate;
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  ExperimentConfig cfg = parse(ss.str());
  cfg.validate();
  return cfg;
}

}  // namespace avguard
