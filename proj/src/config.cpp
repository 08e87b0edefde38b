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

#include "depa/config.hpp"

#include <fstream>
#include <sstream>

namespace depa {

namespace {

std::string trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string &v, const std::string &where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config: " + where + " must be a boolean, got '" + v + "'");
}

int parse_int(const std::string &v, const std::string &where) {
  try {
    size_t pos = 0;
    const int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception &) {
    throw ValidationError("config: " + where + " must be an integer, got '" + v + "'");
  }
}

double parse_double(const std::string &v, const std::string &where) {
  try {
    size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception &) {
    throw ValidationError("config: " + where + " must be a number, got '" + v + "'");
  }
}

uint64_t parse_u64(const std::string &v, const std::string &where) {
  try {
    size_t pos = 0;
    const uint64_t r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception &) {
    throw ValidationError("config: " + where + " must be an unsigned integer, got '" + v + "'");
  }
}

std::array<int, 3> parse_channel_list(const std::string &v, const std::string &where) {
  std::array<int, 3> out{};
  std::istringstream is(v);
  std::string tok;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(is, tok, ','))
      throw ValidationError("config: " + where + " needs 3 comma-separated widths");
    out[static_cast<size_t>(i)] = parse_int(trim(tok), where);
  }
  std::string rest;
  if (std::getline(is, rest, ','))
    throw ValidationError("config: " + where + " needs exactly 3 widths");
  return out;
}

void set_key(RunConfig *cfg, const std::string &section, const std::string &key,
             const std::string &value) {
  const std::string where = section + "." + key;
  if (section == "features") {
    if (key == "kind") {
      if (value == "lms") {
        cfg->features.kind = FeatureKind::kLogMel;
      } else if (value == "stft") {
        cfg->features.kind = FeatureKind::kLogStft;
      } else {
        throw ValidationError("config: features.kind must be 'lms' or 'stft'");
      }
    } else if (key == "sample_rate") {
      cfg->features.sample_rate = parse_int(value, where);
    } else if (key == "n_mels") {
      cfg->features.n_mels = parse_int(value, where);
    } else if (key == "stft_bins") {
      cfg->features.stft_bins = parse_int(value, where);
    } else if (key == "window_ms") {
      cfg->features.window_ms = parse_double(value, where);
    } else if (key == "hop_ms") {
      cfg->features.hop_ms = parse_double(value, where);
    } else {
      throw ValidationError("config: unknown key " + where);
    }
  } else if (section == "slicing") {
    if (key == "k") {
      cfg->slicing.k = parse_int(value, where);
    } else if (key == "t") {
      cfg->slicing.t = parse_int(value, where);
    } else if (key == "alpha") {
      cfg->slicing.alpha = parse_double(value, where);
    } else {
      throw ValidationError("config: unknown key " + where);
    }
  } else if (section == "pretrain") {
    if (key == "enabled") {
      cfg->pretrain_enabled = parse_bool(value, where);
    } else if (key == "random_encoder") {
      cfg->random_encoder = parse_bool(value, where);
    } else if (key == "checkpoint") {
      cfg->pretrain_checkpoint = value;
    } else if (key == "split") {
      if (value != "train" && value != "all")
        throw ValidationError("config: pretrain.split must be 'train' or 'all'");
      cfg->pretrain_split = value;
    } else if (key == "learning_rate") {
      cfg->pretrain.learning_rate = parse_double(value, where);
    } else if (key == "epochs") {
      cfg->pretrain.epochs = parse_int(value, where);
    } else if (key == "batch_size") {
      cfg->pretrain.batch_size = parse_int(value, where);
    } else if (key == "embed_dim") {
      cfg->encoder.embed_dim = parse_int(value, where);
    } else if (key == "enc_channels") {
      cfg->encoder.channels = parse_channel_list(value, where);
    } else if (key == "dec_channels") {
      cfg->decoder.channels = parse_channel_list(value, where);
    } else {
      throw ValidationError("config: unknown key " + where);
    }
  } else if (section == "detector") {
    if (key == "layers") {
      cfg->detector.layers = parse_int(value, where);
    } else if (key == "hidden") {
      cfg->detector.hidden = parse_int(value, where);
    } else if (key == "dropout") {
      cfg->detector.dropout = parse_double(value, where);
    } else if (key == "learning_rate") {
      cfg->detector.learning_rate = parse_double(value, where);
    } else if (key == "epochs") {
      cfg->detector.epochs = parse_int(value, where);
    } else if (key == "grad_accum") {
      cfg->detector.grad_accum = parse_int(value, where);
    } else {
      throw ValidationError("config: unknown key " + where);
    }
  } else if (section == "vad") {
    if (key == "enabled") {
      cfg->vad_enabled = parse_bool(value, where);
    } else if (key == "frame_ms") {
      cfg->vad.frame_ms = parse_double(value, where);
    } else if (key == "rel_threshold_db") {
      cfg->vad.rel_threshold_db = parse_double(value, where);
    } else if (key == "min_segment_s") {
      cfg->vad.min_segment_s = parse_double(value, where);
    } else if (key == "merge_gap_s") {
      cfg->vad.merge_gap_s = parse_double(value, where);
    } else {
      throw ValidationError("config: unknown key " + where);
    }
  } else if (section == "run") {
    if (key == "seed") {
      cfg->seed = parse_u64(value, where);
    } else if (key == "out_dir") {
      cfg->out_dir = value;
    } else if (key == "manifest") {
      cfg->manifest_path = value;
    } else {
      throw ValidationError("config: unknown key " + where);
    }
  } else {
    throw ValidationError("config: unknown section [" + section + "]");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (features.sample_rate <= 0)
    throw ValidationError("config: features.sample_rate must be > 0");
  if (features.n_mels < 2) throw ValidationError("config: features.n_mels must be >= 2");
  if (features.stft_bins < 1) throw ValidationError("config: features.stft_bins must be >= 1");
  SliceConfig s = slicing;
  s.f = features.bins();
  s.validate();
  pretrain.validate();
  encoder.validate();
  decoder.validate();
  detector.validate();
  if (features.bins() < 8)
    throw ValidationError("config: feature dimension must be >= 8 for the encoder");
}

RunConfig default_run_config() { return RunConfig{}; }

RunConfig load_run_config(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config: " + path);
  RunConfig cfg;
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError(path + ":" + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ValidationError(path + ":" + std::to_string(line_no) + ": key outside any section");
    try {
      set_key(&cfg, section, key, value);
    } catch (const ValidationError &e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

void apply_override(RunConfig *cfg, const std::string &assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ValidationError("override must look like section.key=value: " + assignment);
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const size_t dot = path.find('.');
  if (dot == std::string::npos)
    throw ValidationError("override must look like section.key=value: " + assignment);
  set_key(cfg, path.substr(0, dot), path.substr(dot + 1), value);
}

std::string format_run_config(const RunConfig &cfg) {
  std::ostringstream os;
  os << "[features]\n";
  os << "kind = " << (cfg.features.kind == FeatureKind::kLogMel ? "lms" : "stft") << "\n";
  os << "sample_rate = " << cfg.features.sample_rate << "\n";
  os << "n_mels = " << cfg.features.n_mels << "\n";
  os << "stft_bins = " << cfg.features.stft_bins << "\n";
  os << "window_ms = " << cfg.features.window_ms << "\n";
  os << "hop_ms = " << cfg.features.hop_ms << "\n";
  os << "\n[slicing]\n";
  os << "k = " << cfg.slicing.k << "\n";
  os << "t = " << cfg.slicing.t << "\n";
  os << "alpha = " << cfg.slicing.alpha << "\n";
  os << "\n[pretrain]\n";
  os << "enabled = " << (cfg.pretrain_enabled ? "true" : "false") << "\n";
  os << "random_encoder = " << (cfg.random_encoder ? "true" : "false") << "\n";
  os << "checkpoint = " << cfg.pretrain_checkpoint << "\n";
  os << "split = " << cfg.pretrain_split << "\n";
  os << "learning_rate = " << cfg.pretrain.learning_rate << "\n";
  os << "epochs = " << cfg.pretrain.epochs << "\n";
  os << "batch_size = " << cfg.pretrain.batch_size << "\n";
  os << "embed_dim = " << cfg.encoder.embed_dim << "\n";
  os << "enc_channels = " << cfg.encoder.channels[0] << "," << cfg.encoder.channels[1] << ","
     << cfg.encoder.channels[2] << "\n";
  os << "dec_channels = " << cfg.decoder.channels[0] << "," << cfg.decoder.channels[1] << ","
     << cfg.decoder.channels[2] << "\n";
  os << "\n[detector]\n";
  os << "layers = " << cfg.detector.layers << "\n";
  os << "hidden = " << cfg.detector.hidden << "\n";
  os << "dropout = " << cfg.detector.dropout << "\n";
  os << "learning_rate = " << cfg.detector.learning_rate << "\n";
  os << "epochs = " << cfg.detector.epochs << "\n";
  os << "grad_accum = " << cfg.detector.grad_accum << "\n";
  os << "\n[vad]\n";
  os << "enabled = " << (cfg.vad_enabled ? "true" : "false") << "\n";
  os << "frame_ms = " << cfg.vad.frame_ms << "\n";
  os << "rel_threshold_db = " << cfg.vad.rel_threshold_db << "\n";
  os << "min_segment_s = " << cfg.vad.min_segment_s << "\n";
  os << "merge_gap_s = " << cfg.vad.merge_gap_s << "\n";
  os << "\n[run]\n";
  os << "seed = " << cfg.seed << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "manifest = " << cfg.manifest_path << "\n";
  return os.str();
}

}  // namespace depa
