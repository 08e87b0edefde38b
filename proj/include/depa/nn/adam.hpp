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

#ifndef DEPA_NN_ADAM_HPP_
#define DEPA_NN_ADAM_HPP_

#include <cmath>
#include <vector>

#include "depa/nn/tensor.hpp"

namespace depa {
namespace nn {

// Adam with the standard moment decays (0.9, 0.999) and bias correction.
template <typename T>
class Adam {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  explicit Adam(double learning_rate) : lr_(learning_rate) {}

  // Applies one update from the gradients currently stored in refs, then
  // leaves the gradients untouched (caller zeroes them).
  void step(const TensorRefs<T> &refs) {
    if (m_.empty()) {
      for (const TensorRef<T> &r : refs) {
        if (!r.trainable()) continue;
        m_.emplace_back(r.value->size(), T(0));
        v_.emplace_back(r.value->size(), T(0));
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, t_);
    const double bc2 = 1.0 - std::pow(kBeta2, t_);
    size_t slot = 0;
    for (const TensorRef<T> &r : refs) {
      if (!r.trainable()) continue;
      std::vector<T> &m = m_[slot];
      std::vector<T> &v = v_[slot];
      ++slot;
      for (size_t i = 0; i < r.value->size(); ++i) {
        const double g = static_cast<double>((*r.grad)[i]);
        const double mi = kBeta1 * static_cast<double>(m[i]) + (1.0 - kBeta1) * g;
        const double vi = kBeta2 * static_cast<double>(v[i]) + (1.0 - kBeta2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double mhat = mi / bc1;
        const double vhat = vi / bc2;
        (*r.value)[i] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + kEps));
      }
    }
  }

 private:
  double lr_;
  int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace nn
}  // namespace depa

#endif  // DEPA_NN_ADAM_HPP_
