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

#include "depa/slicing.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "depa/common.hpp"

namespace depa {

void SliceConfig::validate() const {
  if (k < 1) throw ValidationError("slice config: k must be >= 1");
  if (t < 1) throw ValidationError("slice config: T must be >= 1");
  if (alpha < 0.0) throw ValidationError("slice config: alpha must be >= 0");
  if (f < 1) throw ValidationError("slice config: F must be >= 1");
}

int gap_frames(const SliceConfig &cfg) {
  cfg.validate();
  return static_cast<int>(std::floor(cfg.alpha * cfg.sample_frames()));
}

int num_samples(int64_t s_frames, const SliceConfig &cfg) {
  cfg.validate();
  if (s_frames <= 0) throw ValidationError("empty clip");
  const double denom = (1.0 + cfg.alpha) * cfg.sample_frames();
  const int n = static_cast<int>(std::floor(static_cast<double>(s_frames) / denom));
  return n >= 1 ? n : 1;
}

void split_sample(const float *sample, const SliceConfig &cfg,
                  std::vector<float> *context, std::vector<float> *center) {
  const size_t f = static_cast<size_t>(cfg.f);
  const size_t kt = static_cast<size_t>(cfg.k) * cfg.t;
  const size_t t = static_cast<size_t>(cfg.t);

  context->resize(2 * kt * f);
  center->resize(t * f);

  // rows [0, kT) -> left context, rows [kT, (k+1)T) -> center,
  // rows [(k+1)T, (2k+1)T) -> right context.
  std::memcpy(context->data(), sample, kt * f * sizeof(float));
  std::memcpy(center->data(), sample + kt * f, t * f * sizeof(float));
  std::memcpy(context->data() + kt * f, sample + (kt + t) * f, kt * f * sizeof(float));
}

void reassemble_sample(const std::vector<float> &context,
                       const std::vector<float> &center,
                       const SliceConfig &cfg, std::vector<float> *sample) {
  const size_t f = static_cast<size_t>(cfg.f);
  const size_t kt = static_cast<size_t>(cfg.k) * cfg.t;
  const size_t t = static_cast<size_t>(cfg.t);
  if (context.size() != 2 * kt * f || center.size() != t * f)
    throw ValidationError("reassemble_sample: wrong row count");

  sample->resize((2 * kt + t) * f);
  std::memcpy(sample->data(), context.data(), kt * f * sizeof(float));
  std::memcpy(sample->data() + kt * f, center.data(), t * f * sizeof(float));
  std::memcpy(sample->data() + (kt + t) * f, context.data() + kt * f, kt * f * sizeof(float));
}

std::vector<TrainingSample> slice_clip(const Spectrogram &clip,
                                       const std::string &clip_id,
                                       const SliceConfig &cfg) {
  cfg.validate();
  if (clip.num_bins != cfg.f)
    throw ValidationError("slice_clip: clip has " + std::to_string(clip.num_bins) +
                          " bins, config expects " + std::to_string(cfg.f));
  const int64_t s_frames = clip.num_frames;
  const int n = num_samples(s_frames, cfg);
  const int span = cfg.sample_frames();
  const int64_t stride = span + gap_frames(cfg);
  const size_t f = static_cast<size_t>(cfg.f);

  std::vector<TrainingSample> out;
  out.reserve(static_cast<size_t>(n));
  std::vector<float> sample_rows(static_cast<size_t>(span) * f);
  for (int i = 0; i < n; ++i) {
    const int64_t start = static_cast<int64_t>(i) * stride;
    std::fill(sample_rows.begin(), sample_rows.end(), 0.0f);
    for (int r = 0; r < span; ++r) {
      const int64_t src = start + r;
      if (src >= s_frames) break;  // remaining rows stay zero
      std::memcpy(sample_rows.data() + static_cast<size_t>(r) * f, clip.row(static_cast<int>(src)),
                  f * sizeof(float));
    }
    TrainingSample ts;
    ts.clip_id = clip_id;
    ts.sample_index = static_cast<uint32_t>(i);
    ts.context_rows = cfg.context_frames();
    ts.center_rows = cfg.t;
    ts.cols = cfg.f;
    split_sample(sample_rows.data(), cfg, &ts.context, &ts.center);
    out.push_back(std::move(ts));
  }
  return out;
}

namespace {

void write_matrix_block(std::ostream &os, const std::vector<float> &m, int rows, int cols) {
  bin::write_bytes(os, "SPEC", 4);
  bin::write_u32(os, 1);
  bin::write_u32(os, static_cast<uint32_t>(rows));
  bin::write_u32(os, static_cast<uint32_t>(cols));
  bin::write_f32_array(os, m.data(), m.size());
}

void read_matrix_block(std::istream &is, std::vector<float> *m, int *rows, int *cols) {
  char magic[4];
  bin::read_bytes(is, magic, 4, "sample matrix magic");
  if (std::memcmp(magic, "SPEC", 4) != 0) throw ValidationError("bad archive: matrix magic");
  if (bin::read_u32(is, "sample matrix version") != 1)
    throw ValidationError("bad archive: matrix version");
  *rows = static_cast<int>(bin::read_u32(is, "sample matrix rows"));
  *cols = static_cast<int>(bin::read_u32(is, "sample matrix cols"));
  m->resize(static_cast<size_t>(*rows) * *cols);
  bin::read_f32_array(is, m->data(), m->size(), "sample matrix data");
}

}  // namespace

void write_sample_record(std::ostream &os, const TrainingSample &sample) {
  bin::write_string(os, sample.clip_id);
  bin::write_u32(os, sample.sample_index);
  write_matrix_block(os, sample.context, sample.context_rows, sample.cols);
  write_matrix_block(os, sample.center, sample.center_rows, sample.cols);
}

bool read_sample_record(std::istream &is, TrainingSample *sample) {
  // Probe for clean EOF before the next record.
  if (is.peek() == std::char_traits<char>::eof()) return false;
  sample->clip_id = bin::read_string(is, "sample clip_id");
  sample->sample_index = bin::read_u32(is, "sample index");
  int ctx_cols = 0, cen_cols = 0;
  read_matrix_block(is, &sample->context, &sample->context_rows, &ctx_cols);
  read_matrix_block(is, &sample->center, &sample->center_rows, &cen_cols);
  if (ctx_cols != cen_cols) throw ValidationError("bad archive: context/center width mismatch");
  sample->cols = ctx_cols;
  return true;
}

void save_archive(const std::string &path, const std::vector<TrainingSample> &samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeError("cannot write archive: " + path);
  for (const TrainingSample &s : samples) write_sample_record(os, s);
  if (!os) throw RuntimeError("short write: " + path);
}

std::vector<TrainingSample> load_archive(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open archive: " + path);
  std::vector<TrainingSample> samples;
  TrainingSample s;
  while (read_sample_record(is, &s)) samples.push_back(std::move(s));
  return samples;
}

}  // namespace depa
