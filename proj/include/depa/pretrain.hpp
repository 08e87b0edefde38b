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

#ifndef DEPA_PRETRAIN_HPP_
#define DEPA_PRETRAIN_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "depa/nn/autoencoder.hpp"
#include "depa/slicing.hpp"

namespace depa {

struct EncoderConfig {
  int embed_dim = 256;
  std::array<int, 3> channels{32, 64, 128};
  int kernel = 3;       // per downsampling block
  int pool_factor = 2;  // per downsampling block
  void validate() const;
};

struct DecoderConfig {
  std::array<int, 3> channels{128, 64, 32};
  void validate() const;
};

struct PretrainConfig {
  double learning_rate = 0.004;
  int epochs = 400;
  int batch_size = 32;
  uint64_t seed = 0;
  void validate() const;
};

// Named float32 arrays plus a config echo.  This container backs both the
// pretrained encoder-decoder (section "PTRN") and the detector ("DTCT").
struct NamedArray {
  std::vector<uint32_t> dims;
  std::vector<float> data;
};

struct Checkpoint {
  std::string section = "PTRN";
  std::vector<std::pair<std::string, std::string>> config;  // ordered echo
  uint32_t epoch = 0;
  float final_mean_loss = 0.0f;
  std::vector<std::pair<std::string, NamedArray>> arrays;

  const NamedArray *find(const std::string &name) const;
  std::string config_value(const std::string &key) const;  // throws if absent
  int config_int(const std::string &key) const;
  double config_double(const std::string &key) const;
};

void save_checkpoint(const std::string &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::string &path);

// Snapshot every array listed in refs (values only) into a checkpoint, and
// restore them by name.
Checkpoint checkpoint_from_refs(const std::string &section,
                                std::vector<std::pair<std::string, std::string>> config,
                                uint32_t epoch, float final_mean_loss,
                                const nn::TensorRefs<float> &refs);
void restore_refs(const Checkpoint &ckpt, const nn::TensorRefs<float> &refs);

// Mean squared error between a T x F target and prediction (Eq. of the
// embedding loss): (1/TF) * sum of squared differences.
double embed_loss(const std::vector<float> &m0, const std::vector<float> &m0p,
                  int t_rows, int f_cols);

struct PretrainResult {
  Checkpoint checkpoint;
  std::vector<double> epoch_mean_loss;
};

// Thrown when the training loss becomes non-finite; carries the checkpoint
// of the last epoch that finished with a finite loss.
class DivergedError : public RuntimeError {
 public:
  DivergedError(const std::string &msg, Checkpoint last_good, std::vector<double> trace)
      : RuntimeError(msg), last_good_(std::move(last_good)), trace_(std::move(trace)) {}
  const Checkpoint &last_good() const { return last_good_; }
  const std::vector<double> &trace() const { return trace_; }

 private:
  Checkpoint last_good_;
  std::vector<double> trace_;
};

// Self-supervised training of the encoder-decoder on a sample archive.
// Shuffling, init and batchnorm statistics are all seed-deterministic.
PretrainResult pretrain(const std::vector<TrainingSample> &samples, const PretrainConfig &cfg,
                        const EncoderConfig &enc, const DecoderConfig &dec);

// The epoch-0 checkpoint pretrain(seed) would start from: architecture and
// random init only, no training.
Checkpoint init_checkpoint(const PretrainConfig &cfg, const EncoderConfig &enc,
                           const DecoderConfig &dec, int k, int t, int f);

// Rebuild the float autoencoder described by a pretrain checkpoint.
// `randomize` keeps the architecture but skips restoring the trained
// weights (used for untrained-encoder baselines).
struct EncoderRuntime {
  explicit EncoderRuntime(const Checkpoint &ckpt, bool randomize = false);

  // Evaluation-mode forward of one S x F segment; S >= 8 after padding.
  std::vector<float> forward(const float *data, int s_rows, int f_cols);

  int embed_dim() const { return net_.embed_dim_; }
  int in_bins() const { return net_.in_bins_; }
  int min_frames() const { return nn::EncoderNet<float>::kMinInputFrames; }

 private:
  nn::EncoderNet<float> net_;
};

// One-off convenience wrappers around the runtimes, matching the
// per-operation contracts (deterministic, shape-checked).
std::vector<float> encoder_forward(const Checkpoint &ckpt, const float *data, int s_rows,
                                   int f_cols);
std::vector<float> decoder_forward(const Checkpoint &ckpt, const std::vector<float> &v);

// Write "epoch,mean_loss" rows.
void save_loss_trace(const std::string &path, const std::vector<double> &trace);

}  // namespace depa

#endif  // DEPA_PRETRAIN_HPP_
