// Copyright 2026 The DEPA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "depa/pipeline.hpp"
#include "depa/synth.hpp"

namespace fs = std::filesystem;
using namespace depa;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
};

void add_common(CLI::App *cmd, CommonArgs *args) {
  cmd->add_option("--config", args->config_path, "Run configuration file (INI)");
  cmd->add_option("--set", args->overrides, "Override a key, e.g. --set pretrain.epochs=40");
  cmd->add_option("--seed", args->seed, "Override run.seed")->each([args](const std::string &) {
    args->seed_set = true;
  });
  cmd->add_option("--out-dir", args->out_dir, "Override run.out_dir");
}

RunConfig resolve_config(const CommonArgs &args) {
  RunConfig cfg = args.config_path.empty() ? default_run_config() : load_run_config(args.config_path);
  // The environment may relocate the run directory; everything else comes
  // from the config file and flags.
  if (const char *env_dir = std::getenv("DEPA_RUN_DIR"); env_dir != nullptr && *env_dir != '\0')
    cfg.out_dir = env_dir;
  for (const std::string &assignment : args.overrides) apply_override(&cfg, assignment);
  if (args.seed_set) cfg.seed = args.seed;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  cfg.validate();
  return cfg;
}

void write_resolved(const RunConfig &cfg) {
  fs::create_directories(cfg.out_dir);
  std::ofstream os(fs::path(cfg.out_dir) / "resolved.ini");
  os << format_run_config(cfg);
}

Manifest open_manifest(const RunConfig &cfg) {
  if (cfg.manifest_path.empty()) throw ValidationError("config: run.manifest is required");
  ManifestOptions opts;
  opts.allow_vad_fallback = cfg.vad_enabled;
  return ingest_manifest(cfg.manifest_path, opts);
}

int cmd_synth_data(int n_patients, uint64_t seed, const std::string &out_dir) {
  SynthOptions opts;
  opts.n_patients = n_patients;
  opts.seed = seed;
  const Manifest manifest = generate_synthetic_corpus(opts, out_dir);
  std::cout << "wrote " << manifest.clips.size() << " clips under " << out_dir << "\n";
  std::cout << (fs::path(out_dir) / "manifest.jsonl").string() << "\n";
  return 0;
}

int cmd_extract_features(const RunConfig &cfg) {
  write_resolved(cfg);
  const Manifest manifest = open_manifest(cfg);
  const fs::path feat_dir = fs::path(cfg.out_dir) / "features";
  fs::create_directories(feat_dir);
  std::vector<const ManifestClip *> clips;
  for (const ManifestClip &c : manifest.clips) clips.push_back(&c);
  parallel_for(static_cast<int>(clips.size()), [&](int i) {
    const ManifestClip &clip = *clips[static_cast<size_t>(i)];
    const Spectrogram spec = compute_features(read_wav(clip.audio_path), cfg.features);
    save_spectrogram((feat_dir / (clip.clip_id + ".spec")).string(), spec);
  });
  std::cout << "extracted features for " << clips.size() << " clips into " << feat_dir.string()
            << "\n";
  return 0;
}

int cmd_prepare_pretrain(const RunConfig &cfg) {
  write_resolved(cfg);
  const Manifest manifest = open_manifest(cfg);
  PipelineCounters counters;
  const std::vector<TrainingSample> archive = prepare_pretrain_data(manifest, cfg, &counters);
  const std::string path = (fs::path(cfg.out_dir) / "archive.bin").string();
  save_archive(path, archive);
  std::cout << "archive: " << archive.size() << " samples from " << counters.clips_processed
            << " clips (vad used on " << counters.vad_invocations << ") -> " << path << "\n";
  return 0;
}

int cmd_pretrain(const RunConfig &cfg, const std::string &archive_path) {
  write_resolved(cfg);
  const std::string path =
      archive_path.empty() ? (fs::path(cfg.out_dir) / "archive.bin").string() : archive_path;
  const std::vector<TrainingSample> archive = load_archive(path);
  PretrainConfig pcfg = cfg.pretrain;
  pcfg.seed = cfg.seed;
  const std::string ckpt_path = (fs::path(cfg.out_dir) / "encoder.ckpt").string();
  const std::string loss_path = (fs::path(cfg.out_dir) / "pretrain_loss.csv").string();
  try {
    PretrainResult result = pretrain(archive, pcfg, cfg.encoder, cfg.decoder);
    save_checkpoint(ckpt_path, result.checkpoint);
    save_loss_trace(loss_path, result.epoch_mean_loss);
    std::cout << "pretrained on " << archive.size() << " samples, final loss "
              << result.checkpoint.final_mean_loss << " -> " << ckpt_path << "\n";
    return 0;
  } catch (const DivergedError &e) {
    save_checkpoint(ckpt_path, e.last_good());
    save_loss_trace(loss_path, e.trace());
    std::cerr << "error: " << e.what() << "; last good checkpoint saved to " << ckpt_path << "\n";
    return kExitRuntime;
  }
}

int cmd_embed(const RunConfig &cfg, const std::string &checkpoint_path) {
  write_resolved(cfg);
  const Manifest manifest = open_manifest(cfg);
  const std::string ckpt_path = checkpoint_path.empty()
                                    ? (fs::path(cfg.out_dir) / "encoder.ckpt").string()
                                    : checkpoint_path;
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const fs::path emb_dir = fs::path(cfg.out_dir) / "embeddings";
  fs::create_directories(emb_dir);
  std::vector<const ManifestClip *> clips;
  for (const ManifestClip &c : manifest.clips) clips.push_back(&c);
  parallel_for(static_cast<int>(clips.size()), [&](int i) {
    const ManifestClip &clip = *clips[static_cast<size_t>(i)];
    EncoderRuntime encoder(ckpt);
    const std::vector<ResponseSegment> responses = clip_responses(clip, cfg, nullptr);
    if (responses.empty())
      throw ValidationError("clip " + clip.clip_id + " has no participant responses");
    save_embeddings((emb_dir / (clip.clip_id + ".emb")).string(),
                    extract_depa_sequence(&encoder, responses));
  });
  std::cout << "embedded " << clips.size() << " clips into " << emb_dir.string() << "\n";
  return 0;
}

// Load PatientSequences for one split from embedding files + manifest labels.
std::vector<PatientSequence> load_split_sequences(const RunConfig &cfg, const Manifest &manifest,
                                                  const std::string &split) {
  std::vector<const ManifestClip *> clips = manifest.split_clips(split);
  std::sort(clips.begin(), clips.end(),
            [](const ManifestClip *a, const ManifestClip *b) { return a->clip_id < b->clip_id; });
  std::vector<PatientSequence> out;
  for (const ManifestClip *clip : clips) {
    if (!clip->labels.has_value())
      throw ValidationError("clip " + clip->clip_id + " lacks labels required for the detector");
    const std::string path =
        (fs::path(cfg.out_dir) / "embeddings" / (clip->clip_id + ".emb")).string();
    const std::vector<DepaVector> vectors = load_embeddings(path);
    if (vectors.empty()) throw ValidationError("no embeddings for clip " + clip->clip_id);
    PatientSequence p;
    p.patient_id = clip->clip_id;
    p.n_responses = static_cast<int>(vectors.size());
    p.input_dim = static_cast<int>(vectors.front().size());
    for (const DepaVector &v : vectors) p.features.insert(p.features.end(), v.begin(), v.end());
    p.has_labels = true;
    p.y_c = clip->labels->phq8_binary;
    p.y_r = clip->labels->phq8_score;
    out.push_back(std::move(p));
  }
  return out;
}

int cmd_train_detector(const RunConfig &cfg) {
  write_resolved(cfg);
  const Manifest manifest = open_manifest(cfg);
  const std::vector<PatientSequence> train = load_split_sequences(cfg, manifest, "train");
  const Standardizer standardizer = fit_standardizer(train);
  DetectorConfig dcfg = cfg.detector;
  dcfg.seed = cfg.seed;
  DetectorResult result = train_detector(train, dcfg, standardizer);
  save_checkpoint((fs::path(cfg.out_dir) / "detector.ckpt").string(), result.checkpoint);
  save_loss_trace((fs::path(cfg.out_dir) / "detector_loss.csv").string(),
                  result.epoch_mean_loss);
  std::cout << "trained detector on " << train.size() << " patients, final loss "
            << result.epoch_mean_loss.back() << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig &cfg, const std::string &detector_path) {
  write_resolved(cfg);
  const Manifest manifest = open_manifest(cfg);
  const std::string ckpt_path = detector_path.empty()
                                    ? (fs::path(cfg.out_dir) / "detector.ckpt").string()
                                    : detector_path;
  DetectorRuntime runtime(load_checkpoint(ckpt_path));
  const std::vector<PatientSequence> dev = load_split_sequences(cfg, manifest, "dev");
  std::vector<Prediction> predictions;
  std::vector<int> pred_b, truth_b;
  std::vector<double> pred_s, truth_s;
  for (const PatientSequence &p : dev) {
    Prediction pred = runtime.predict(p);
    pred_b.push_back(pred.binary);
    truth_b.push_back(p.y_c);
    pred_s.push_back(pred.phq8_estimate);
    truth_s.push_back(p.y_r);
    predictions.push_back(std::move(pred));
  }
  save_predictions_csv((fs::path(cfg.out_dir) / "predictions.csv").string(), predictions);
  const ClassificationReport c = classification_report(pred_b, truth_b);
  const RegressionReport r = regression_report(pred_s, truth_s);
  std::ofstream(fs::path(cfg.out_dir) / "metrics.txt") << format_reports(c, r);
  std::ofstream(fs::path(cfg.out_dir) / "metrics.csv") << format_reports_csv(c, r);
  std::cout << format_reports(c, r);
  return 0;
}

int cmd_run_all(const RunConfig &cfg) {
  run_end_to_end(cfg);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"DEPA: self-supervised depression audio embeddings"};
  app.require_subcommand(1);

  CommonArgs args;

  auto *synth = app.add_subcommand("synth-data", "Generate a synthetic labeled corpus");
  int synth_patients = 40;
  uint64_t synth_seed = 0;
  std::string synth_out = "synth";
  synth->add_option("--patients", synth_patients, "Number of synthetic patients");
  synth->add_option("--seed", synth_seed, "Corpus seed");
  synth->add_option("--out-dir", synth_out, "Corpus output directory");

  auto *extract = app.add_subcommand("extract-features", "Full-clip spectrograms per manifest");
  add_common(extract, &args);
  auto *prepare = app.add_subcommand("prepare-pretrain", "Build the training-pair archive");
  add_common(prepare, &args);
  auto *pre = app.add_subcommand("pretrain", "Train the encoder-decoder on an archive");
  std::string archive_path;
  add_common(pre, &args);
  pre->add_option("--archive", archive_path, "Archive path (default <out_dir>/archive.bin)");
  auto *embed = app.add_subcommand("embed", "Extract response embeddings per clip");
  std::string encoder_path;
  add_common(embed, &args);
  embed->add_option("--checkpoint", encoder_path, "Encoder checkpoint (default <out_dir>/encoder.ckpt)");
  auto *traind = app.add_subcommand("train-detector", "Train the multi-task BLSTM detector");
  add_common(traind, &args);
  auto *eval = app.add_subcommand("evaluate", "Predict and score the dev split");
  std::string detector_path;
  add_common(eval, &args);
  eval->add_option("--detector", detector_path, "Detector checkpoint (default <out_dir>/detector.ckpt)");
  auto *runall = app.add_subcommand("run-all", "Full pipeline end to end");
  add_common(runall, &args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (synth->parsed()) return cmd_synth_data(synth_patients, synth_seed, synth_out);
    const RunConfig cfg = resolve_config(args);
    if (extract->parsed()) return cmd_extract_features(cfg);
    if (prepare->parsed()) return cmd_prepare_pretrain(cfg);
    if (pre->parsed()) return cmd_pretrain(cfg, archive_path);
    if (embed->parsed()) return cmd_embed(cfg, encoder_path);
    if (traind->parsed()) return cmd_train_detector(cfg);
    if (eval->parsed()) return cmd_evaluate(cfg, detector_path);
    if (runall->parsed()) return cmd_run_all(cfg);
  } catch (const ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
