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

#ifndef DEPA_NN_DETECTOR_NET_HPP_
#define DEPA_NN_DETECTOR_NET_HPP_

#include <string>
#include <utility>
#include <vector>

#include "depa/nn/layers.hpp"
#include "depa/nn/lstm.hpp"

namespace depa {
namespace nn {

// Stacked bidirectional LSTM over a patient's response sequence with a
// two-unit linear head read at step 0.  The backward direction has seen the
// whole sequence by step 0, so this single readout summarizes the patient.
template <typename T>
struct DetectorNet {
  DetectorNet(int input_dim, int num_layers, int hidden, double dropout, Rng *rng)
      : input_dim_(input_dim), hidden_(hidden) {
    if (num_layers < 1) throw ValidationError("detector: layers must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("detector: dropout must be in [0, 1)");
    int in = input_dim;
    for (int l = 0; l < num_layers; ++l) {
      layers.emplace_back("detector.layer" + std::to_string(l), in, hidden, rng);
      in = 2 * hidden;
    }
    for (int l = 0; l + 1 < num_layers; ++l) dropouts.emplace_back(dropout);
    head = Linear<T>("detector.head", 2 * hidden, 2, rng);
  }

  // x: n_responses x input_dim.  Returns (classification logit, raw score).
  std::pair<T, T> forward(const SeqMat<T> &x, bool training, Rng *dropout_rng) {
    if (x.dim != input_dim_)
      throw ValidationError("detector: feature width " + std::to_string(x.dim) +
                            " does not match input_dim " + std::to_string(input_dim_));
    if (x.len < 1) throw ValidationError("detector: empty sequence");
    SeqMat<T> a = x, b;
    for (size_t l = 0; l < layers.size(); ++l) {
      layers[l].forward(a, &b);
      if (l + 1 < layers.size()) {
        dropouts[l].forward(b, training, dropout_rng, &a);
      } else {
        a = std::move(b);
      }
    }
    top_out_ = std::move(a);
    Tensor4<T> h0(1, 2 * hidden_, 1, 1), y;
    std::copy(top_out_.row(0), top_out_.row(0) + 2 * hidden_, h0.v.begin());
    head.forward(h0, &y);
    return {y.v[0], y.v[1]};
  }

  void backward(T dlogit, T draw) {
    Tensor4<T> dy(1, 2, 1, 1), dh0;
    dy.v[0] = dlogit;
    dy.v[1] = draw;
    head.backward(dy, &dh0);
    SeqMat<T> dh(top_out_.len, 2 * hidden_), dx;
    std::copy(dh0.v.begin(), dh0.v.end(), dh.row(0));
    for (size_t l = layers.size(); l-- > 0;) {
      layers[l].backward(dh, &dx);
      if (l > 0) {
        dropouts[l - 1].backward(dx, &dh);
      }
    }
  }

  void collect(TensorRefs<T> *refs) {
    for (auto &layer : layers) layer.collect(refs);
    head.collect(refs);
  }

  int input_dim_ = 0, hidden_ = 0;
  std::vector<BlstmLayer<T>> layers;
  std::vector<SeqDropout<T>> dropouts;
  Linear<T> head;
  SeqMat<T> top_out_;
};

}  // namespace nn
}  // namespace depa

#endif  // DEPA_NN_DETECTOR_NET_HPP_
