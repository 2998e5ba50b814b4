// Copyright 2026 The AVGuard Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "avguard/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "CLI11.hpp"

#include "avguard/container.hpp"
#include "avguard/errors.hpp"
#include "avguard/model_io.hpp"

namespace avguard {

namespace fs = std::filesystem;

namespace {

void write_metrics_file(const fs::path& dir, const MetricReport& report) {
  fs::create_directories(dir);
  std::ofstream os(dir / "metrics.json");
  if (!os) throw ContainerError("cannot write metrics.json in " + dir.string());
  os << report.to_json().dump(2) << "\n";
}

CmwModel load_model_or_fail(const ExperimentConfig& cfg, std::string* digest) {
  if (cfg.checkpoint.empty()) throw ConfigError("checkpoint path is required");
  if (!fs::exists(cfg.checkpoint))
    throw ConfigError("checkpoint does not exist: " + cfg.checkpoint);
  return load_checkpoint(cfg.checkpoint, digest);
}

AVStream read_input_container(const ExperimentConfig& cfg, ContainerMeta* meta) {
  if (cfg.input_dir.empty()) throw ConfigError("input_dir is required");
  return read_container(cfg.input_dir, meta);
}

std::vector<AVStream> load_dataset(const fs::path& dir) {
  if (!fs::exists(dir)) throw ConfigError("dataset directory missing: " + dir.string());
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  std::vector<AVStream> clips;
  for (const auto& p : entries) clips.push_back(read_container(p));
  if (clips.empty()) throw ConfigError("no containers under " + dir.string());
  return clips;
}

void check_model_binding(const ContainerMeta& meta, const std::string& digest) {
  if (!meta.layout)
    throw ContainerError("container sidecar lacks a packing layout");
  if (meta.model_id.empty())
    throw ContainerError("container sidecar lacks a model binding");
  if (meta.model_id != digest)
    throw ModelMismatchError("container was produced by model " + meta.model_id +
                             " but the checkpoint digest is " + digest);
}

}  // namespace

void cmd_gen_data(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
  SynthSpec spec = cfg.synth;
  gen_synthetic_dataset(cfg.output_dir, spec);
  std::printf("wrote %d clips to %s\n", spec.n_clips, cfg.output_dir.c_str());
}

MetricReport cmd_embed(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
  std::string digest;
  CmwModel model = load_model_or_fail(cfg, &digest);
  ContainerMeta meta;
  AVStream stream = read_input_container(cfg, &meta);

  auto stack = model.stack_weights<double>();
  EmbedResult result = embed(stream, stack, model.hyper.stft_window,
                             model.hyper.stft_hop);

  double psnr_sum = 0, ssim_sum = 0;
  for (size_t i = 0; i < stream.frames.size(); ++i) {
    psnr_sum += psnr_db(stream.frames[i], result.frames[i]);
    ssim_sum += ssim(stream.frames[i], result.frames[i]);
  }
  MetricReport report;
  report.psnr_db = psnr_sum / static_cast<double>(stream.frames.size());
  report.ssim = ssim_sum / static_cast<double>(stream.frames.size());

  AVStream out = stream;
  out.frames = result.frames;  // audio stays bit-identical
  ContainerMeta out_meta;
  out_meta.role = "watermarked";
  out_meta.model_id = digest;
  out_meta.layout = result.layout;
  write_container(cfg.output_dir, out, out_meta);
  write_metrics_file(cfg.output_dir, report);
  std::printf("embed: psnr_db=%.4f ssim=%.6f\n", *report.psnr_db, *report.ssim);
  return report;
}

MetricReport cmd_recover(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
  std::string digest;
  CmwModel model = load_model_or_fail(cfg, &digest);
  ContainerMeta meta;
  AVStream stream = read_input_container(cfg, &meta);
  check_model_binding(meta, digest);

  auto stack = model.stack_weights<double>();
  auto estimator = model.estimator_weights<double>();
  RecoverResult rec = recover(stream.frames, stack, estimator, *meta.layout,
                              stream.chunk_samples());

  AVStream out;
  out.fps = stream.fps;
  out.sample_rate = stream.sample_rate;
  out.frames = rec.frames;
  out.audio = rec.audio;
  ContainerMeta out_meta;
  out_meta.role = "recovered";
  out_meta.model_id = digest;
  out_meta.layout = meta.layout;
  write_container(cfg.output_dir, out, out_meta);

  MetricReport report;
  if (!cfg.original_dir.empty()) {
    AVStream original = read_container(cfg.original_dir);
    report.snr_db = snr_db(original.audio, rec.audio);
    int lsd_window = std::min(model.hyper.stft_window,
                              static_cast<int>(original.audio.size()) / 2);
    if (lsd_window % 2 != 0) --lsd_window;
    report.lsd = log_spectral_distance(original.audio, rec.audio, lsd_window,
                                       std::max(1, lsd_window / 4));
    std::printf("recover: snr_db=%.4f lsd=%.4f\n", *report.snr_db, *report.lsd);
  } else {
    std::printf("recover: wrote %zu frames and %zu samples\n",
                rec.frames.size(), rec.audio.size());
  }
  write_metrics_file(cfg.output_dir, report);
  return report;
}

TamperReport cmd_localize(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
  std::string digest;
  CmwModel model = load_model_or_fail(cfg, &digest);
  ContainerMeta meta;
  AVStream stream = read_input_container(cfg, &meta);
  check_model_binding(meta, digest);

  auto sfe = model.sfe_weights<double>();
  std::vector<double> recovered;
  if (!cfg.recovered_audio.empty()) {
    int sr = 0;
    recovered = read_wav(cfg.recovered_audio, &sr);
    if (sr != stream.sample_rate)
      throw ContainerError("recovered audio sample rate differs from container");
    if (recovered.size() != stream.audio.size())
      throw ContainerError("recovered audio length differs from container");
  } else {
    auto stack = model.stack_weights<double>();
    auto estimator = model.estimator_weights<double>();
    recovered = recover(stream.frames, stack, estimator, *meta.layout,
                        stream.chunk_samples())
                    .audio;
  }

  double dt = 1.0 / stream.fps;
  FeatureMap f_tam = extract_features(stream.audio, sfe, stream.chunk_samples(),
                                      model.hyper.stft_window,
                                      model.hyper.stft_hop, dt);
  FeatureMap f_rec = extract_features(recovered, sfe, stream.chunk_samples(),
                                      model.hyper.stft_window,
                                      model.hyper.stft_hop, dt);
  TamperReport report;
  report.scores = similarity_scores(f_tam, f_rec, cfg.median_width);
  report.threshold = std::isnan(cfg.localize_threshold)
                         ? model.hyper.localize_threshold
                         : cfg.localize_threshold;
  report.intervals =
      scores_to_intervals(report.scores, report.threshold, cfg.min_run);

  if (!cfg.ground_truth.empty()) {
    GroundTruth gt = GroundTruth::load(cfg.ground_truth);
    std::vector<int> labels = interval_labels(
        gt.audio_intervals, static_cast<int>(report.scores.scores.size()), dt);
    std::vector<double> likelihood(report.scores.scores.size());
    for (size_t i = 0; i < likelihood.size(); ++i)
      likelihood[i] = -report.scores.scores[i];
    report.metrics.iou = interval_iou(report.intervals, gt.audio_intervals);
    report.metrics.ap = average_precision(likelihood, labels);
    bool both_classes =
        std::count(labels.begin(), labels.end(), 1) > 0 &&
        std::count(labels.begin(), labels.end(), 0) > 0;
    if (both_classes) report.metrics.auc = auc_score(likelihood, labels);
  }

  fs::create_directories(cfg.output_dir);
  report.save(fs::path(cfg.output_dir) / "report.json");
  std::printf("localize: %zu interval(s) at threshold %.4f\n",
              report.intervals.size(), report.threshold);
  return report;
}

void cmd_simulate(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
  ContainerMeta meta;
  AVStream stream = read_input_container(cfg, &meta);

  std::vector<double> donor;
  if (!cfg.donor_dir.empty()) {
    AVStream donor_stream = read_container(cfg.donor_dir);
    if (donor_stream.sample_rate != stream.sample_rate)
      throw ContainerError("donor sample rate differs from input");
    donor = donor_stream.audio;
  } else {
    donor = stream.audio;
    std::reverse(donor.begin(), donor.end());
  }

  std::vector<Tensor> originals;
  const std::vector<Tensor>* originals_ptr = nullptr;
  if (!cfg.original_dir.empty()) {
    AVStream original = read_container(cfg.original_dir);
    if (original.frames.size() != stream.frames.size())
      throw ContainerError("original/input frame counts differ");
    originals = std::move(original.frames);
    originals_ptr = &originals;
  }

  TamperPlan plan = cfg.tamper;
  plan.seed = cfg.seed;
  auto [tampered, gt] = apply_plan(stream, plan, donor, originals_ptr);

  ContainerMeta out_meta = meta;
  out_meta.role = "tampered";
  write_container(cfg.output_dir, tampered, out_meta);
  gt.save(fs::path(cfg.output_dir) / "ground_truth.json");
  std::printf("simulate: %zu audio interval(s), %zu tampered frame(s)\n",
              gt.audio_intervals.size(), gt.tampered_frame_indices.size());
}

TrainOutcome cmd_train(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
  if (cfg.dataset_dir.empty()) throw ConfigError("dataset_dir is required");
  fs::create_directories(cfg.output_dir);

  std::vector<AVStream> train_clips = load_dataset(cfg.dataset_dir);
  std::vector<AVStream> val_clips;
  if (!cfg.val_dir.empty()) {
    val_clips = load_dataset(cfg.val_dir);
  } else if (train_clips.size() >= 2) {
    // hold the last clip out for validation
    val_clips.push_back(std::move(train_clips.back()));
    train_clips.pop_back();
  } else {
    val_clips = train_clips;
  }

  CmwModel model(cfg.hyper(), cfg.seed);
  fs::path checkpoint = cfg.checkpoint.empty()
                            ? fs::path(cfg.output_dir) / "model.avgd"
                            : fs::path(cfg.checkpoint);
  fs::path log_path = fs::path(cfg.output_dir) / "metrics.jsonl";

  TrainOutcome outcome =
      train(model, train_clips, val_clips, cfg.train, cfg.weights, cfg.mask,
            cfg.tamper, checkpoint, log_path, cfg.resume);
  const ValidationResult& v = outcome.final_validation;
  std::printf("train: iterations=%d val_snr=%.3f val_psnr=%.3f val_ssim=%.4f "
              "val_auc=%.4f val_ap=%.4f val_iou=%.4f threshold=%.3f\n",
              outcome.iterations_run, v.recovery_snr, v.psnr, v.ssim, v.auc,
              v.ap, v.iou, v.best_threshold);
  return outcome;
}

MetricReport cmd_evaluate(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("output_dir is required");
  if (cfg.original_dir.empty()) throw ConfigError("original_dir is required");
  AVStream original = read_container(cfg.original_dir);

  MetricReport report;
  if (!cfg.watermarked_dir.empty()) {
    AVStream wm = read_container(cfg.watermarked_dir);
    if (wm.frames.size() != original.frames.size())
      throw ContainerError("frame count mismatch against the reference");
    double p = 0, s = 0;
    for (size_t i = 0; i < wm.frames.size(); ++i) {
      p += psnr_db(original.frames[i], wm.frames[i]);
      s += ssim(original.frames[i], wm.frames[i]);
    }
    report.psnr_db = p / static_cast<double>(wm.frames.size());
    report.ssim = s / static_cast<double>(wm.frames.size());
  }
  if (!cfg.recovered_audio.empty()) {
    int sr = 0;
    std::vector<double> rec = read_wav(cfg.recovered_audio, &sr);
    if (sr != original.sample_rate || rec.size() != original.audio.size())
      throw ContainerError("recovered audio does not match the reference");
    report.snr_db = snr_db(original.audio, rec);
    int lsd_window = std::min(510, static_cast<int>(rec.size()) / 2);
    if (lsd_window % 2 != 0) --lsd_window;
    report.lsd = log_spectral_distance(original.audio, rec, lsd_window,
                                       std::max(1, lsd_window / 4));
  }
  if (!cfg.report.empty() && !cfg.ground_truth.empty()) {
    TamperReport tr = TamperReport::load(cfg.report);
    GroundTruth gt = GroundTruth::load(cfg.ground_truth);
    std::vector<int> labels = interval_labels(
        gt.audio_intervals, static_cast<int>(tr.scores.scores.size()),
        tr.scores.timestep_duration);
    std::vector<double> likelihood(tr.scores.scores.size());
    for (size_t i = 0; i < likelihood.size(); ++i)
      likelihood[i] = -tr.scores.scores[i];
    report.iou = interval_iou(tr.intervals, gt.audio_intervals);
    report.ap = average_precision(likelihood, labels);
    bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                std::count(labels.begin(), labels.end(), 0) > 0;
    if (both) report.auc = auc_score(likelihood, labels);
  }
  write_metrics_file(cfg.output_dir, report);
  std::printf("evaluate: wrote metrics.json\n");
  return report;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"cross-modal audio-in-video watermarking toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, output_dir, checkpoint, input_dir, original_dir,
      donor_dir, ground_truth, recovered_audio, watermarked_dir, report_path;
  int64_t seed = -1;
  bool resume = false;

  app.add_option("--config", config_path, "experiment config file");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--output", output_dir, "output directory");
  app.add_option("--checkpoint", checkpoint, "model checkpoint path");
  app.add_option("--input", input_dir, "input container directory");
  app.add_option("--original", original_dir, "reference container directory");
  app.add_option("--donor", donor_dir, "donor container directory");
  app.add_option("--ground-truth", ground_truth, "ground truth file");
  app.add_option("--recovered", recovered_audio, "recovered audio wav");
  app.add_option("--watermarked", watermarked_dir, "watermarked container");
  app.add_option("--report", report_path, "tamper report file");
  app.add_flag("--resume", resume, "resume training from the checkpoint");

  auto* c_embed = app.add_subcommand("embed", "embed audio into frames");
  auto* c_recover = app.add_subcommand("recover", "recover audio from frames");
  auto* c_localize = app.add_subcommand("localize", "localize tampered audio");
  auto* c_simulate = app.add_subcommand("simulate", "simulate tampering");
  auto* c_train = app.add_subcommand("train", "train a model");
  auto* c_evaluate = app.add_subcommand("evaluate", "compute metrics");
  auto* c_gen = app.add_subcommand("gen-data", "generate a synthetic dataset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::load(config_path);
    if (seed >= 0) {
      cfg.seed = static_cast<uint64_t>(seed);
      cfg.train.seed = cfg.seed;
      cfg.tamper.seed = cfg.seed;
      cfg.synth.seed = cfg.seed;
    }
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
    if (!input_dir.empty()) cfg.input_dir = input_dir;
    if (!original_dir.empty()) cfg.original_dir = original_dir;
    if (!donor_dir.empty()) cfg.donor_dir = donor_dir;
    if (!ground_truth.empty()) cfg.ground_truth = ground_truth;
    if (!recovered_audio.empty()) cfg.recovered_audio = recovered_audio;
    if (!watermarked_dir.empty()) cfg.watermarked_dir = watermarked_dir;
    if (!report_path.empty()) cfg.report = report_path;
    if (resume) cfg.resume = true;
    cfg.validate();

    if (c_embed->parsed()) cmd_embed(cfg);
    else if (c_recover->parsed()) cmd_recover(cfg);
    else if (c_localize->parsed()) cmd_localize(cfg);
    else if (c_simulate->parsed()) cmd_simulate(cfg);
    else if (c_train->parsed()) cmd_train(cfg);
    else if (c_evaluate->parsed()) cmd_evaluate(cfg);
    else if (c_gen->parsed()) cmd_gen_data(cfg);
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(ExitCode::kNumeric);
  }
}

}  // namespace avguard
