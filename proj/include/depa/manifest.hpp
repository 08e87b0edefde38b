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

#ifndef DEPA_MANIFEST_HPP_
#define DEPA_MANIFEST_HPP_

#include <optional>
#include <string>
#include <vector>

namespace depa {

enum class SpeakerRole { kParticipant, kInterviewer };

struct ManifestSegment {
  double start_seconds = 0.0;
  double end_seconds = 0.0;
  SpeakerRole speaker = SpeakerRole::kParticipant;
};

struct ClipLabels {
  int phq8_binary = 0;
  double phq8_score = 0.0;
};

struct ManifestClip {
  std::string clip_id;
  std::string audio_path;  // resolved relative to the manifest location
  std::string split;       // "train" or "dev"
  std::vector<ManifestSegment> segments;  // may be empty when VAD is enabled
  std::optional<ClipLabels> labels;
};

struct Manifest {
  std::vector<ManifestClip> clips;

  std::vector<const ManifestClip *> split_clips(const std::string &split) const;
};

struct ManifestOptions {
  // Whether clips without segment annotations are acceptable (their
  // segments then come from energy VAD downstream).
  bool allow_vad_fallback = false;
};

// Line-delimited JSON, one clip record per line.  Validation failures name
// the offending line.
Manifest ingest_manifest(const std::string &path, const ManifestOptions &opts = {});

// Serialization used by the synthetic corpus generator.
void write_manifest(const std::string &path, const Manifest &manifest);

}  // namespace depa

#endif  // DEPA_MANIFEST_HPP_
