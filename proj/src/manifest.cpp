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

#include "depa/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "depa/common.hpp"

namespace depa {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<const ManifestClip *> Manifest::split_clips(const std::string &split) const {
  std::vector<const ManifestClip *> out;
  for (const ManifestClip &c : clips)
    if (c.split == split) out.push_back(&c);
  return out;
}

namespace {

[[noreturn]] void fail(const std::string &path, int line, const std::string &msg) {
  throw ValidationError(path + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

Manifest ingest_manifest(const std::string &path, const ManifestOptions &opts) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open manifest: " + path);
  const fs::path base = fs::path(path).parent_path();

  Manifest manifest;
  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error &e) {
      fail(path, line_no, std::string("invalid JSON record: ") + e.what());
    }
    if (!rec.is_object()) fail(path, line_no, "record is not an object");

    ManifestClip clip;
    try {
      clip.clip_id = rec.at("clip_id").get<std::string>();
      clip.audio_path = (base / rec.at("audio").get<std::string>()).string();
      clip.split = rec.at("split").get<std::string>();
    } catch (const json::exception &e) {
      fail(path, line_no, std::string("missing or malformed required field: ") + e.what());
    }
    if (clip.clip_id.empty()) fail(path, line_no, "empty clip_id");
    if (clip.split != "train" && clip.split != "dev")
      fail(path, line_no, "split must be 'train' or 'dev' for clip " + clip.clip_id);
    if (!seen_ids.insert(clip.clip_id).second)
      fail(path, line_no, "duplicate clip_id " + clip.clip_id);

    if (rec.contains("segments")) {
      if (!rec["segments"].is_array()) fail(path, line_no, "segments must be an array");
      for (const json &s : rec["segments"]) {
        ManifestSegment seg;
        try {
          seg.start_seconds = s.at("start").get<double>();
          seg.end_seconds = s.at("end").get<double>();
          const std::string role = s.at("speaker").get<std::string>();
          if (role == "participant") {
            seg.speaker = SpeakerRole::kParticipant;
          } else if (role == "interviewer") {
            seg.speaker = SpeakerRole::kInterviewer;
          } else {
            fail(path, line_no, "unknown speaker role '" + role + "' in clip " + clip.clip_id);
          }
        } catch (const json::exception &e) {
          fail(path, line_no, std::string("malformed segment: ") + e.what());
        }
        if (seg.start_seconds < 0.0 || seg.end_seconds <= seg.start_seconds)
          fail(path, line_no, "segment with end <= start in clip " + clip.clip_id);
        if (!clip.segments.empty() &&
            seg.start_seconds < clip.segments.back().end_seconds)
          fail(path, line_no, "overlapping segments in clip " + clip.clip_id);
        clip.segments.push_back(seg);
      }
    }
    if (clip.segments.empty() && !opts.allow_vad_fallback)
      fail(path, line_no,
           "clip " + clip.clip_id + " has no segments and VAD fallback is disabled");

    const bool has_binary = rec.contains("phq8_binary");
    const bool has_score = rec.contains("phq8_score");
    if (has_binary != has_score)
      fail(path, line_no, "clip " + clip.clip_id + " must carry both labels or neither");
    if (has_binary) {
      ClipLabels labels;
      try {
        labels.phq8_binary = rec["phq8_binary"].get<int>();
        labels.phq8_score = rec["phq8_score"].get<double>();
      } catch (const json::exception &e) {
        fail(path, line_no, std::string("malformed labels: ") + e.what());
      }
      if (labels.phq8_binary != 0 && labels.phq8_binary != 1)
        fail(path, line_no, "phq8_binary must be 0 or 1 for clip " + clip.clip_id);
      if (labels.phq8_score < 0.0 || labels.phq8_score > 24.0)
        fail(path, line_no, "phq8_score must be in [0, 24] for clip " + clip.clip_id);
      clip.labels = labels;
    }
    manifest.clips.push_back(std::move(clip));
  }
  if (manifest.clips.empty()) throw ValidationError("manifest has no clips: " + path);

  // A split that carries any labels must be fully labeled.
  std::map<std::string, std::pair<int, int>> labeled_count;  // split -> (labeled, total)
  for (const ManifestClip &c : manifest.clips) {
    auto &entry = labeled_count[c.split];
    if (c.labels.has_value()) ++entry.first;
    ++entry.second;
  }
  for (const auto &[split, counts] : labeled_count) {
    if (counts.first != 0 && counts.first != counts.second)
      throw ValidationError(path + ": split '" + split +
                            "' is partially labeled (missing labels on labeled split)");
  }
  return manifest;
}

void write_manifest(const std::string &path, const Manifest &manifest) {
  std::ofstream os(path);
  if (!os) throw RuntimeError("cannot write manifest: " + path);
  const fs::path base = fs::path(path).parent_path();
  for (const ManifestClip &clip : manifest.clips) {
    json rec;
    rec["clip_id"] = clip.clip_id;
    rec["audio"] = fs::relative(clip.audio_path, base).string();
    rec["split"] = clip.split;
    json segs = json::array();
    for (const ManifestSegment &s : clip.segments) {
      segs.push_back({{"start", s.start_seconds},
                      {"end", s.end_seconds},
                      {"speaker", s.speaker == SpeakerRole::kParticipant ? "participant"
                                                                         : "interviewer"}});
    }
    rec["segments"] = std::move(segs);
    if (clip.labels.has_value()) {
      rec["phq8_binary"] = clip.labels->phq8_binary;
      rec["phq8_score"] = clip.labels->phq8_score;
    }
    os << rec.dump() << "\n";
  }
  if (!os) throw RuntimeError("short write: " + path);
}

}  // namespace depa
