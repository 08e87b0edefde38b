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

#ifndef DEPA_SLICING_HPP_
#define DEPA_SLICING_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "depa/dsp.hpp"

namespace depa {

// Context radius k, frames per sub-spectrogram T, gap fraction alpha.
struct SliceConfig {
  int k = 3;
  int t = 96;
  double alpha = 0.1;
  int f = 128;  // feature dimension

  int sample_frames() const { return (2 * k + 1) * t; }   // rows per sample
  int context_frames() const { return 2 * k * t; }        // rows per context
  void validate() const;
};

// One self-supervised training item: the center block of a sample is held
// out as the prediction target, the flanking blocks form the context.
struct TrainingSample {
  std::string clip_id;
  uint32_t sample_index = 0;
  // context: (2kT) x F, sub-blocks in temporal order with the center removed.
  std::vector<float> context;
  // center: T x F.
  std::vector<float> center;
  int context_rows = 0;
  int center_rows = 0;
  int cols = 0;
};

// floor(alpha * (2k+1) * T): frames discarded between consecutive samples.
int gap_frames(const SliceConfig &cfg);

// floor(S / ((1+alpha)(2k+1)T)), promoted to 1 for short clips (which get
// zero-padded to a full sample).
int num_samples(int64_t s_frames, const SliceConfig &cfg);

// Split a full (2k+1)T x F sample into (context, center).
void split_sample(const float *sample, const SliceConfig &cfg,
                  std::vector<float> *context, std::vector<float> *center);

// Inverse of split_sample: reinsert the center block at row kT.
void reassemble_sample(const std::vector<float> &context,
                       const std::vector<float> &center,
                       const SliceConfig &cfg, std::vector<float> *sample);

// Cut a clip spectrogram into training samples.  Sample i occupies rows
// [i * stride, i * stride + (2k+1)T) with stride = (2k+1)T + gap_frames;
// rows past the end of the clip are zero.
std::vector<TrainingSample> slice_clip(const Spectrogram &clip,
                                       const std::string &clip_id,
                                       const SliceConfig &cfg);

// Training-pair archive: a plain sequence of records
// {clip_id length-prefixed string, sample_index u32, context block,
//  center block} using the "SPEC" binary block format.
void write_sample_record(std::ostream &os, const TrainingSample &sample);
bool read_sample_record(std::istream &is, TrainingSample *sample);
void save_archive(const std::string &path, const std::vector<TrainingSample> &samples);
std::vector<TrainingSample> load_archive(const std::string &path);

}  // namespace depa

#endif  // DEPA_SLICING_HPP_
