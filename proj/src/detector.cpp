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

#include "depa/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "depa/nn/adam.hpp"

namespace depa {

namespace {

constexpr double kProbClamp = 1e-7;

double sigmoid_d(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void Standardizer::apply(PatientSequence *patient) const {
  if (patient->input_dim != dim())
    throw ValidationError("standardizer: width mismatch for patient " + patient->patient_id);
  patient->features = apply_rows(patient->features, patient->n_responses, patient->input_dim);
}

std::vector<float> Standardizer::apply_rows(const std::vector<float> &rows, int n, int d) const {
  std::vector<float> out(rows.size());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) {
      const size_t i = static_cast<size_t>(r) * d + c;
      out[i] = static_cast<float>(
          (static_cast<double>(rows[i]) - mean[static_cast<size_t>(c)]) /
          std::sqrt(static_cast<double>(var[static_cast<size_t>(c)]) + kEps));
    }
  }
  return out;
}

Standardizer fit_standardizer(const std::vector<PatientSequence> &train) {
  if (train.empty()) throw ValidationError("fit_standardizer: no patients");
  const int d = train.front().input_dim;
  int64_t total_rows = 0;
  for (const PatientSequence &p : train) {
    if (p.input_dim != d) throw ValidationError("fit_standardizer: inconsistent feature widths");
    total_rows += p.n_responses;
  }
  if (total_rows < 2) throw ValidationError("fit_standardizer: need at least 2 response rows");

  // Pooled population moments over every response row of every patient.
  std::vector<double> mean(static_cast<size_t>(d), 0.0), var(static_cast<size_t>(d), 0.0);
  for (const PatientSequence &p : train)
    for (int r = 0; r < p.n_responses; ++r) {
      const float *row = p.row(r);
      for (int c = 0; c < d; ++c) mean[static_cast<size_t>(c)] += row[c];
    }
  for (int c = 0; c < d; ++c) mean[static_cast<size_t>(c)] /= static_cast<double>(total_rows);
  for (const PatientSequence &p : train)
    for (int r = 0; r < p.n_responses; ++r) {
      const float *row = p.row(r);
      for (int c = 0; c < d; ++c) {
        const double diff = row[c] - mean[static_cast<size_t>(c)];
        var[static_cast<size_t>(c)] += diff * diff;
      }
    }
  for (int c = 0; c < d; ++c) var[static_cast<size_t>(c)] /= static_cast<double>(total_rows);

  Standardizer s;
  s.mean.assign(mean.begin(), mean.end());
  s.var.assign(var.begin(), var.end());
  return s;
}

void DetectorConfig::validate() const {
  if (layers < 1) throw ValidationError("detector config: layers must be >= 1");
  if (hidden < 1) throw ValidationError("detector config: hidden must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ValidationError("detector config: dropout must be in [0, 1)");
  if (learning_rate < 0.0) throw ValidationError("detector config: learning rate must be >= 0");
  if (epochs < 1) throw ValidationError("detector config: epochs must be >= 1");
  if (grad_accum < 1) throw ValidationError("detector config: grad_accum must be >= 1");
}

double bce_loss(double probability, int label) {
  const double p = std::clamp(probability, kProbClamp, 1.0 - kProbClamp);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double huber_loss(double predicted, double truth) {
  const double d = truth - predicted;
  return std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
}

double multitask_loss(double logit, int y_c, double predicted_score, double y_r) {
  return bce_loss(sigmoid_d(logit), y_c) + huber_loss(predicted_score, y_r);
}

namespace {

std::vector<std::pair<std::string, std::string>> detector_config_echo(const DetectorConfig &cfg,
                                                                      int input_dim) {
  return {
      {"input_dim", std::to_string(input_dim)},
      {"layers", std::to_string(cfg.layers)},
      {"hidden", std::to_string(cfg.hidden)},
      {"dropout", std::to_string(cfg.dropout)},
      {"learning_rate", std::to_string(cfg.learning_rate)},
      {"epochs", std::to_string(cfg.epochs)},
      {"grad_accum", std::to_string(cfg.grad_accum)},
      {"seed", std::to_string(cfg.seed)},
  };
}

// Loss gradients for one patient: d(loss)/d(logit) and d(loss)/d(raw score).
std::pair<double, double> loss_gradients(double logit, int y_c, double raw, double y_r) {
  const double dlogit = sigmoid_d(logit) - static_cast<double>(y_c);
  const double d = y_r - raw;
  const double draw = std::abs(d) < 1.0 ? -d : -(d > 0.0 ? 1.0 : -1.0);
  return {dlogit, draw};
}

}  // namespace

DetectorResult train_detector(const std::vector<PatientSequence> &train,
                              const DetectorConfig &cfg, const Standardizer &standardizer) {
  cfg.validate();
  if (train.size() < 2) throw ValidationError("train_detector: need at least 2 patients");
  bool saw0 = false, saw1 = false;
  for (const PatientSequence &p : train) {
    if (!p.has_labels)
      throw ValidationError("train_detector: patient " + p.patient_id + " has no labels");
    (p.y_c == 1 ? saw1 : saw0) = true;
  }
  if (!saw0 || !saw1) throw ValidationError("degenerate labels: training set has a single class");
  const int input_dim = train.front().input_dim;

  // Standardize once up front with the training moments.
  std::vector<PatientSequence> data = train;
  for (PatientSequence &p : data) standardizer.apply(&p);

  Rng rng(cfg.seed);
  Rng init_rng = rng.fork(0x494e4954);
  Rng shuffle_rng = rng.fork(0x53485546);
  Rng dropout_rng = rng.fork(0x44524f50);
  nn::DetectorNet<float> net(input_dim, cfg.layers, cfg.hidden, cfg.dropout, &init_rng);
  nn::TensorRefs<float> refs;
  net.collect(&refs);
  nn::Adam<float> adam(cfg.learning_rate);

  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  DetectorResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(&order);
    double loss_sum = 0.0;
    size_t in_group = 0;
    nn::zero_grads(refs);
    for (size_t idx = 0; idx < order.size(); ++idx) {
      const PatientSequence &p = data[order[idx]];
      nn::SeqMat<float> x(p.n_responses, input_dim);
      x.v = p.features;
      const auto [logit, raw] = net.forward(x, /*training=*/true, &dropout_rng);
      const double loss = multitask_loss(logit, p.y_c, raw, p.y_r);
      if (!std::isfinite(loss))
        throw RuntimeError("train_detector: diverged at epoch " + std::to_string(epoch + 1));
      loss_sum += loss;
      const auto [dlogit, draw] = loss_gradients(logit, p.y_c, raw, p.y_r);
      net.backward(static_cast<float>(dlogit), static_cast<float>(draw));
      ++in_group;
      if (in_group == static_cast<size_t>(cfg.grad_accum) || idx + 1 == order.size()) {
        // Mean gradient over the accumulated patients.
        const float inv = 1.0f / static_cast<float>(in_group);
        for (const nn::TensorRef<float> &r : refs)
          if (r.trainable())
            for (float &g : *r.grad) g *= inv;
        adam.step(refs);
        nn::zero_grads(refs);
        in_group = 0;
      }
    }
    result.epoch_mean_loss.push_back(loss_sum / static_cast<double>(data.size()));
  }

  result.checkpoint = checkpoint_from_refs(
      "DTCT", detector_config_echo(cfg, input_dim), static_cast<uint32_t>(cfg.epochs),
      static_cast<float>(result.epoch_mean_loss.back()), refs);
  // The standardizer travels with the model.
  NamedArray mean_arr, var_arr;
  mean_arr.dims = {static_cast<uint32_t>(standardizer.mean.size())};
  mean_arr.data = standardizer.mean;
  var_arr.dims = {static_cast<uint32_t>(standardizer.var.size())};
  var_arr.data = standardizer.var;
  result.checkpoint.arrays.emplace_back("standardizer.mean", std::move(mean_arr));
  result.checkpoint.arrays.emplace_back("standardizer.var", std::move(var_arr));
  return result;
}

DetectorRuntime::DetectorRuntime(const Checkpoint &ckpt) {
  if (ckpt.section != "DTCT") throw ValidationError("bad checkpoint: not a detector checkpoint");
  const int input_dim = ckpt.config_int("input_dim");
  const int layers = ckpt.config_int("layers");
  const int hidden = ckpt.config_int("hidden");
  const double dropout = ckpt.config_double("dropout");
  Rng dummy(0);
  net_ = std::make_unique<nn::DetectorNet<float>>(input_dim, layers, hidden, dropout, &dummy);
  nn::TensorRefs<float> refs;
  net_->collect(&refs);
  for (const nn::TensorRef<float> &r : refs) {
    const NamedArray *arr = ckpt.find(r.name);
    if (arr == nullptr) throw ValidationError("bad checkpoint: missing array " + r.name);
    if (arr->data.size() != r.value->size())
      throw ValidationError("bad checkpoint: array " + r.name + " has wrong size");
    *r.value = arr->data;
  }
  const NamedArray *mean = ckpt.find("standardizer.mean");
  const NamedArray *var = ckpt.find("standardizer.var");
  if (mean == nullptr || var == nullptr)
    throw ValidationError("bad checkpoint: missing standardizer");
  standardizer_.mean = mean->data;
  standardizer_.var = var->data;
}

std::pair<double, double> DetectorRuntime::forward_standardized(const PatientSequence &patient) {
  nn::SeqMat<float> x(patient.n_responses, patient.input_dim);
  x.v = patient.features;
  const auto [logit, raw] = net_->forward(x, /*training=*/false, nullptr);
  return {static_cast<double>(logit), static_cast<double>(raw)};
}

Prediction DetectorRuntime::predict(const PatientSequence &patient) {
  PatientSequence standardized = patient;
  standardizer_.apply(&standardized);
  const auto [logit, raw] = forward_standardized(standardized);

  Prediction pred;
  pred.patient_id = patient.patient_id;
  pred.logit = logit;
  pred.probability = std::clamp(sigmoid_d(logit), kProbClamp, 1.0 - kProbClamp);
  pred.binary = pred.probability >= 0.5 ? 1 : 0;
  pred.phq8_estimate = std::clamp(raw, 0.0, 24.0);
  return pred;
}

void save_predictions_csv(const std::string &path, const std::vector<Prediction> &preds) {
  std::ofstream os(path);
  if (!os) throw RuntimeError("cannot write predictions: " + path);
  os << "patient_id,probability,binary,phq8_estimate\n";
  char buf[128];
  for (const Prediction &p : preds) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%d,%.6f\n", p.patient_id.c_str(), p.probability,
                  p.binary, p.phq8_estimate);
    os << buf;
  }
  if (!os) throw RuntimeError("short write: " + path);
}

}  // namespace depa
