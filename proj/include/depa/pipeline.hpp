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

#ifndef DEPA_PIPELINE_HPP_
#define DEPA_PIPELINE_HPP_

#include <functional>
#include <string>
#include <vector>

#include "depa/config.hpp"
#include "depa/embedding.hpp"
#include "depa/manifest.hpp"
#include "depa/metrics.hpp"

namespace depa {

// Stage instrumentation, mostly for tests ("was VAD invoked?").
struct PipelineCounters {
  int clips_processed = 0;
  int vad_invocations = 0;
  int segments_sliced = 0;
};

// Deterministic parallel map: runs fn(0..n) on a small worker pool; results
// must be written by index by the callers.
void parallel_for(int n, const std::function<void(int)> &fn);

// Feature extraction per the configured front end (resamples first).
Spectrogram compute_features(const Waveform &wav, const FeatureConfig &cfg);

// Participant responses of one clip as per-response spectrograms, from the
// manifest segments when present, otherwise from energy VAD.
std::vector<ResponseSegment> clip_responses(const ManifestClip &clip, const RunConfig &cfg,
                                            PipelineCounters *counters);

// Self-supervised training pairs for the configured split: per clip, every
// annotated segment (or VAD segment) is sliced independently.  Labels are
// never read here.
std::vector<TrainingSample> prepare_pretrain_data(const Manifest &manifest, const RunConfig &cfg,
                                                  PipelineCounters *counters);

// Architecture-only checkpoint with the seed-deterministic random init,
// used for untrained-encoder baselines.
Checkpoint init_encoder_checkpoint(const RunConfig &cfg);

struct PipelineResult {
  std::string run_dir;
  ClassificationReport classification;
  RegressionReport regression;
  std::vector<Prediction> predictions;  // dev split, ordered by patient id
};

// Full pipeline: pretrain (or load/init the encoder), embed every labeled
// patient, fit the standardizer on train, train the detector, predict and
// score the dev split.  All artifacts land under cfg.out_dir.
PipelineResult run_end_to_end(const RunConfig &cfg);

}  // namespace depa

#endif  // DEPA_PIPELINE_HPP_
