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

#ifndef DEPA_EMBEDDING_HPP_
#define DEPA_EMBEDDING_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "depa/pretrain.hpp"

namespace depa {

// One participant response: the spectrogram rows covering its time span.
struct ResponseSegment {
  std::string clip_id;
  uint32_t response_index = 0;
  Spectrogram spectrogram;
  double start_seconds = 0.0;
  double end_seconds = 0.0;
};

using DepaVector = std::vector<float>;

// N x D frame-level feature matrix ingested from an external toolchain.
struct FrameFeatureMatrix {
  int rows = 0, cols = 0;
  std::vector<float> data;

  float at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

// Embedding of one response through the trained encoder.  Segments shorter
// than the encoder minimum are symmetrically zero-padded.
DepaVector extract_depa(EncoderRuntime *encoder, const ResponseSegment &seg);

// Order-preserving embedding of a patient's responses.
std::vector<DepaVector> extract_depa_sequence(EncoderRuntime *encoder,
                                              const std::vector<ResponseSegment> &segs);

// Per-column mean, median, population variance, min, max, population
// skewness and excess kurtosis, laid out stat-major (all means first).
// Columns with variance below 1e-12 get skewness = kurtosis = 0; non-finite
// cells are dropped per column before pooling.
std::vector<float> higher_order_stats(const FrameFeatureMatrix &m);

// Headerless CSV, one frame per row.
FrameFeatureMatrix read_feature_csv(const std::string &path);

// Per-patient embedding file: records {response_index u32, dim u32,
// float32 values}.
void save_embeddings(const std::string &path, const std::vector<DepaVector> &vectors);
std::vector<DepaVector> load_embeddings(const std::string &path);

}  // namespace depa

#endif  // DEPA_EMBEDDING_HPP_
