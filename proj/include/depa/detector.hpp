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

#ifndef DEPA_DETECTOR_HPP_
#define DEPA_DETECTOR_HPP_

#include <memory>
#include <string>
#include <vector>

#include "depa/nn/detector_net.hpp"
#include "depa/pretrain.hpp"

namespace depa {

// Ordered response-level feature vectors for one patient, with labels when
// the patient belongs to a labeled split.
struct PatientSequence {
  std::string patient_id;
  int n_responses = 0;
  int input_dim = 0;
  std::vector<float> features;  // n_responses x input_dim, row-major
  bool has_labels = false;
  int y_c = 0;       // binary depression label
  double y_r = 0.0;  // PHQ-8 score in [0, 24]

  const float *row(int r) const { return features.data() + static_cast<size_t>(r) * input_dim; }
};

// Global per-dimension moments fitted on the pooled training responses.
struct Standardizer {
  static constexpr double kEps = 1e-8;
  std::vector<float> mean, var;

  int dim() const { return static_cast<int>(mean.size()); }
  void apply(PatientSequence *patient) const;
  std::vector<float> apply_rows(const std::vector<float> &rows, int n, int d) const;
};

Standardizer fit_standardizer(const std::vector<PatientSequence> &train);

struct DetectorConfig {
  int layers = 4;
  int hidden = 128;
  double dropout = 0.1;
  double learning_rate = 0.004;
  int epochs = 100;
  int grad_accum = 8;  // patients per optimizer step
  uint64_t seed = 0;
  void validate() const;
};

struct Prediction {
  std::string patient_id;
  double logit = 0.0;
  double probability = 0.5;   // sigmoid(logit), clamped inside (0, 1)
  int binary = 0;             // probability >= 0.5
  double phq8_estimate = 0.0; // clamped to [0, 24]
};

// Task losses.  bce_loss clamps the probability to [1e-7, 1 - 1e-7].
double bce_loss(double probability, int label);
double huber_loss(double predicted, double truth);
double multitask_loss(double logit, int y_c, double predicted_score, double y_r);

struct DetectorResult {
  Checkpoint checkpoint;  // section "DTCT"; includes the standardizer
  std::vector<double> epoch_mean_loss;
};

// Multi-task training over per-patient sequences; per-patient batches with
// gradient accumulation, seed-deterministic shuffling and dropout.
DetectorResult train_detector(const std::vector<PatientSequence> &train,
                              const DetectorConfig &cfg, const Standardizer &standardizer);

// Inference wrapper rebuilt from a "DTCT" checkpoint.
class DetectorRuntime {
 public:
  explicit DetectorRuntime(const Checkpoint &ckpt);
  Prediction predict(const PatientSequence &patient);
  // Raw eval-mode forward on already-standardized features.
  std::pair<double, double> forward_standardized(const PatientSequence &patient);
  const Standardizer &standardizer() const { return standardizer_; }

 private:
  std::unique_ptr<nn::DetectorNet<float>> net_;
  Standardizer standardizer_;
};

void save_predictions_csv(const std::string &path, const std::vector<Prediction> &preds);

}  // namespace depa

#endif  // DEPA_DETECTOR_HPP_
