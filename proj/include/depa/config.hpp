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

#ifndef DEPA_CONFIG_HPP_
#define DEPA_CONFIG_HPP_

#include <array>
#include <cstdint>
#include <string>

#include "depa/detector.hpp"
#include "depa/dsp.hpp"
#include "depa/pretrain.hpp"
#include "depa/slicing.hpp"

namespace depa {

enum class FeatureKind { kLogMel, kLogStft };

struct FeatureConfig {
  FeatureKind kind = FeatureKind::kLogMel;
  int sample_rate = 22050;
  int n_mels = 128;
  int stft_bins = 512;
  double window_ms = 93.0;
  double hop_ms = 23.0;

  int bins() const { return kind == FeatureKind::kLogMel ? n_mels : stft_bins; }
};

// Sectioned key=value configuration for the whole pipeline.  Defaults are
// the full-scale profile; configs/desk.ini scales it down.
struct RunConfig {
  FeatureConfig features;
  SliceConfig slicing;  // slicing.f is derived from features at load time
  PretrainConfig pretrain;
  EncoderConfig encoder;
  DecoderConfig decoder;
  bool pretrain_enabled = true;
  bool random_encoder = false;          // skip training, keep the random init
  std::string pretrain_checkpoint;      // load instead of training when set
  std::string pretrain_split = "train"; // or "all"
  DetectorConfig detector;
  bool vad_enabled = false;
  VadOptions vad;
  uint64_t seed = 42;
  std::string out_dir = "runs/out";
  std::string manifest_path;

  void validate() const;
};

// Parse an INI-style file: [section] headers, key = value pairs, '#'
// comments.  Unknown sections or keys are rejected.
RunConfig load_run_config(const std::string &path);
RunConfig default_run_config();

// Apply a "section.key=value" override (CLI flag).
void apply_override(RunConfig *cfg, const std::string &assignment);

// Render the fully resolved configuration in the same INI format.
std::string format_run_config(const RunConfig &cfg);

}  // namespace depa

#endif  // DEPA_CONFIG_HPP_
