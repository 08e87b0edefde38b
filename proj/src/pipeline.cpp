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

#include "depa/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace depa {

namespace fs = std::filesystem;

void parallel_for(int n, const std::function<void(int)> &fn) {
  const int workers =
      std::max(1, std::min(n, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Spectrogram compute_features(const Waveform &wav, const FeatureConfig &cfg) {
  const Waveform at_rate = resample(wav, cfg.sample_rate);
  if (cfg.kind == FeatureKind::kLogMel)
    return log_mel(at_rate, cfg.n_mels, cfg.window_ms, cfg.hop_ms);
  StftOptions opts;
  opts.window_ms = cfg.window_ms;
  opts.hop_ms = cfg.hop_ms;
  opts.out_bins = cfg.stft_bins;
  return stft_log_power(at_rate, opts);
}

namespace {

// Time span of a clip in annotated (or VAD) segments, with speaker roles.
std::vector<ManifestSegment> clip_segments(const ManifestClip &clip, const Waveform &wav,
                                           const RunConfig &cfg, PipelineCounters *counters) {
  if (!clip.segments.empty()) return clip.segments;
  if (!cfg.vad_enabled)
    throw ValidationError("clip " + clip.clip_id +
                          " has no segments and VAD fallback is disabled");
  if (counters != nullptr) ++counters->vad_invocations;
  std::vector<ManifestSegment> segs;
  for (const VadSegment &v : vad_energy(wav, cfg.vad)) {
    // VAD cannot attribute speakers; treat detected speech as participant.
    segs.push_back({v.start_seconds, v.end_seconds, SpeakerRole::kParticipant});
  }
  return segs;
}

// Spectrogram of one [start, end) span.  Spans shorter than one analysis
// window are zero-padded so that every annotated response yields at least
// one frame.
Spectrogram segment_spectrogram(const Waveform &wav, double start_s, double end_s,
                                const FeatureConfig &cfg) {
  const int64_t n = static_cast<int64_t>(wav.samples.size());
  int64_t lo = llround(start_s * cfg.sample_rate);
  int64_t hi = llround(end_s * cfg.sample_rate);
  lo = std::clamp<int64_t>(lo, 0, n);
  hi = std::clamp<int64_t>(hi, lo, n);
  Waveform span;
  span.sample_rate_hz = cfg.sample_rate;
  span.samples.assign(wav.samples.begin() + lo, wav.samples.begin() + hi);
  const int win = window_samples(cfg.window_ms, cfg.sample_rate);
  if (static_cast<int>(span.samples.size()) < win)
    span.samples.resize(static_cast<size_t>(win), 0.0f);
  if (cfg.kind == FeatureKind::kLogMel)
    return log_mel(span, cfg.n_mels, cfg.window_ms, cfg.hop_ms);
  StftOptions opts;
  opts.window_ms = cfg.window_ms;
  opts.hop_ms = cfg.hop_ms;
  opts.out_bins = cfg.stft_bins;
  return stft_log_power(span, opts);
}

}  // namespace

std::vector<ResponseSegment> clip_responses(const ManifestClip &clip, const RunConfig &cfg,
                                            PipelineCounters *counters) {
  const Waveform wav = resample(read_wav(clip.audio_path), cfg.features.sample_rate);
  const std::vector<ManifestSegment> segs = clip_segments(clip, wav, cfg, counters);
  std::vector<ResponseSegment> responses;
  uint32_t index = 0;
  for (const ManifestSegment &seg : segs) {
    if (seg.speaker != SpeakerRole::kParticipant) continue;
    ResponseSegment r;
    r.clip_id = clip.clip_id;
    r.response_index = index++;
    r.start_seconds = seg.start_seconds;
    r.end_seconds = seg.end_seconds;
    r.spectrogram = segment_spectrogram(wav, seg.start_seconds, seg.end_seconds, cfg.features);
    responses.push_back(std::move(r));
  }
  if (counters != nullptr) ++counters->clips_processed;
  return responses;
}

std::vector<TrainingSample> prepare_pretrain_data(const Manifest &manifest, const RunConfig &cfg,
                                                  PipelineCounters *counters) {
  std::vector<const ManifestClip *> clips;
  for (const ManifestClip &c : manifest.clips)
    if (cfg.pretrain_split == "all" || c.split == cfg.pretrain_split) clips.push_back(&c);
  if (clips.empty()) throw ValidationError("no clips in pretrain split '" + cfg.pretrain_split + "'");

  SliceConfig slice_cfg = cfg.slicing;
  slice_cfg.f = cfg.features.bins();

  std::vector<std::vector<TrainingSample>> per_clip(clips.size());
  std::vector<int> vad_used(clips.size(), 0);
  std::vector<std::string> failures(clips.size());
  parallel_for(static_cast<int>(clips.size()), [&](int i) {
    const ManifestClip &clip = *clips[static_cast<size_t>(i)];
    try {
      const Waveform wav = resample(read_wav(clip.audio_path), cfg.features.sample_rate);
      PipelineCounters local;
      const std::vector<ManifestSegment> segs = clip_segments(clip, wav, cfg, &local);
      vad_used[static_cast<size_t>(i)] = local.vad_invocations;
      int seg_index = 0;
      for (const ManifestSegment &seg : segs) {
        // Pretraining is self-supervised: every speech segment is usable.
        const Spectrogram spec =
            segment_spectrogram(wav, seg.start_seconds, seg.end_seconds, cfg.features);
        if (spec.num_frames < 1) continue;
        const std::string slice_id = clip.clip_id + "#" + std::to_string(seg_index++);
        std::vector<TrainingSample> samples = slice_clip(spec, slice_id, slice_cfg);
        auto &bucket = per_clip[static_cast<size_t>(i)];
        bucket.insert(bucket.end(), std::make_move_iterator(samples.begin()),
                      std::make_move_iterator(samples.end()));
      }
    } catch (const std::exception &e) {
      failures[static_cast<size_t>(i)] = e.what();
    }
  });

  std::vector<TrainingSample> archive;
  int skipped = 0;
  for (size_t i = 0; i < clips.size(); ++i) {
    if (!failures[i].empty()) {
      std::cerr << "warning: skipping clip " << clips[i]->clip_id << ": " << failures[i] << "\n";
      ++skipped;
      continue;
    }
    if (counters != nullptr) {
      ++counters->clips_processed;
      counters->vad_invocations += vad_used[i];
      counters->segments_sliced += static_cast<int>(per_clip[i].size());
    }
    archive.insert(archive.end(), std::make_move_iterator(per_clip[i].begin()),
                   std::make_move_iterator(per_clip[i].end()));
  }
  if (skipped == static_cast<int>(clips.size()))
    throw RuntimeError("all clips failed during pretrain data preparation");
  if (archive.empty()) throw RuntimeError("pretrain data preparation yielded no samples");
  return archive;
}

Checkpoint init_encoder_checkpoint(const RunConfig &cfg) {
  PretrainConfig pcfg = cfg.pretrain;
  pcfg.seed = cfg.seed;
  return init_checkpoint(pcfg, cfg.encoder, cfg.decoder, cfg.slicing.k, cfg.slicing.t,
                         cfg.features.bins());
}

namespace {

struct LabeledPatient {
  const ManifestClip *clip = nullptr;
  PatientSequence sequence;
};

void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream os(path);
  if (!os) throw RuntimeError("cannot write " + path);
  os << text;
  if (!os) throw RuntimeError("short write: " + path);
}

}  // namespace

PipelineResult run_end_to_end(const RunConfig &cfg) {
  cfg.validate();
  if (cfg.manifest_path.empty()) throw ValidationError("config: run.manifest is required");
  fs::create_directories(cfg.out_dir);
  fs::create_directories(fs::path(cfg.out_dir) / "embeddings");
  write_text_file((fs::path(cfg.out_dir) / "resolved.ini").string(), format_run_config(cfg));

  ManifestOptions mopts;
  mopts.allow_vad_fallback = cfg.vad_enabled;
  const Manifest manifest = ingest_manifest(cfg.manifest_path, mopts);

  // Stage 1: obtain the encoder.
  Checkpoint encoder_ckpt;
  if (!cfg.pretrain_checkpoint.empty()) {
    encoder_ckpt = load_checkpoint(cfg.pretrain_checkpoint);
  } else if (cfg.random_encoder) {
    encoder_ckpt = init_encoder_checkpoint(cfg);
    save_checkpoint((fs::path(cfg.out_dir) / "encoder.ckpt").string(), encoder_ckpt);
  } else if (cfg.pretrain_enabled) {
    PipelineCounters counters;
    std::vector<TrainingSample> archive = prepare_pretrain_data(manifest, cfg, &counters);
    std::cout << "pretrain: " << archive.size() << " samples from " << counters.clips_processed
              << " clips\n";
    PretrainConfig pcfg = cfg.pretrain;
    pcfg.seed = cfg.seed;
    PretrainResult r = pretrain(archive, pcfg, cfg.encoder, cfg.decoder);
    save_loss_trace((fs::path(cfg.out_dir) / "pretrain_loss.csv").string(), r.epoch_mean_loss);
    encoder_ckpt = std::move(r.checkpoint);
    save_checkpoint((fs::path(cfg.out_dir) / "encoder.ckpt").string(), encoder_ckpt);
  } else {
    throw ValidationError("no encoder available: pretraining disabled and no checkpoint given");
  }

  // Stage 2: embed every labeled patient (sorted for determinism).
  std::vector<const ManifestClip *> labeled;
  for (const ManifestClip &c : manifest.clips)
    if (c.labels.has_value()) labeled.push_back(&c);
  if (labeled.empty()) throw ValidationError("manifest has no labeled clips");
  std::sort(labeled.begin(), labeled.end(),
            [](const ManifestClip *a, const ManifestClip *b) { return a->clip_id < b->clip_id; });

  std::vector<LabeledPatient> patients(labeled.size());
  parallel_for(static_cast<int>(labeled.size()), [&](int i) {
    const ManifestClip &clip = *labeled[static_cast<size_t>(i)];
    EncoderRuntime encoder(encoder_ckpt);
    const std::vector<ResponseSegment> responses = clip_responses(clip, cfg, nullptr);
    if (responses.empty())
      throw ValidationError("clip " + clip.clip_id + " has no participant responses");
    const std::vector<DepaVector> vectors = extract_depa_sequence(&encoder, responses);

    LabeledPatient &p = patients[static_cast<size_t>(i)];
    p.clip = &clip;
    p.sequence.patient_id = clip.clip_id;
    p.sequence.n_responses = static_cast<int>(vectors.size());
    p.sequence.input_dim = static_cast<int>(vectors.front().size());
    p.sequence.features.reserve(vectors.size() * vectors.front().size());
    for (const DepaVector &v : vectors)
      p.sequence.features.insert(p.sequence.features.end(), v.begin(), v.end());
    p.sequence.has_labels = true;
    p.sequence.y_c = clip.labels->phq8_binary;
    p.sequence.y_r = clip.labels->phq8_score;
    save_embeddings((fs::path(cfg.out_dir) / "embeddings" / (clip.clip_id + ".emb")).string(),
                    vectors);
  });

  std::vector<PatientSequence> train, dev;
  for (LabeledPatient &p : patients)
    (p.clip->split == "train" ? train : dev).push_back(std::move(p.sequence));
  if (train.empty() || dev.empty())
    throw ValidationError("need labeled clips in both train and dev splits");

  // Stage 3: standardize on train, fit the detector.
  const Standardizer standardizer = fit_standardizer(train);
  DetectorConfig dcfg = cfg.detector;
  dcfg.seed = cfg.seed;
  DetectorResult detector = train_detector(train, dcfg, standardizer);
  save_loss_trace((fs::path(cfg.out_dir) / "detector_loss.csv").string(),
                  detector.epoch_mean_loss);
  save_checkpoint((fs::path(cfg.out_dir) / "detector.ckpt").string(), detector.checkpoint);

  // Stage 4: predict and score the dev split.
  DetectorRuntime runtime(detector.checkpoint);
  PipelineResult result;
  result.run_dir = cfg.out_dir;
  std::vector<int> pred_binary, truth_binary;
  std::vector<double> pred_score, truth_score;
  for (const PatientSequence &p : dev) {
    Prediction pred = runtime.predict(p);
    pred_binary.push_back(pred.binary);
    truth_binary.push_back(p.y_c);
    pred_score.push_back(pred.phq8_estimate);
    truth_score.push_back(p.y_r);
    result.predictions.push_back(std::move(pred));
  }
  save_predictions_csv((fs::path(cfg.out_dir) / "predictions.csv").string(), result.predictions);

  result.classification = classification_report(pred_binary, truth_binary);
  result.regression = regression_report(pred_score, truth_score);
  const std::string report = format_reports(result.classification, result.regression);
  write_text_file((fs::path(cfg.out_dir) / "metrics.txt").string(), report);
  write_text_file((fs::path(cfg.out_dir) / "metrics.csv").string(),
                  format_reports_csv(result.classification, result.regression));
  std::cout << report;
  return result;
}

}  // namespace depa
