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

#ifndef DEPA_NN_TENSOR_HPP_
#define DEPA_NN_TENSOR_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "depa/common.hpp"

namespace depa {
namespace nn {

// Dense NCHW tensor.  Linear layers use h = w = 1.
template <typename T>
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> v;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_) { resize(n_, c_, h_, w_); }

  void resize(int n_, int c_, int h_, int w_) {
    n = n_;
    c = c_;
    h = h_;
    w = w_;
    v.assign(static_cast<size_t>(n) * c * h * w, T(0));
  }

  size_t size() const { return v.size(); }

  T *plane(int ni, int ci) {
    return v.data() + (static_cast<size_t>(ni) * c + ci) * h * w;
  }
  const T *plane(int ni, int ci) const {
    return v.data() + (static_cast<size_t>(ni) * c + ci) * h * w;
  }

  T &at(int ni, int ci, int hi, int wi) {
    return v[((static_cast<size_t>(ni) * c + ci) * h + hi) * w + wi];
  }
  T at(int ni, int ci, int hi, int wi) const {
    return v[((static_cast<size_t>(ni) * c + ci) * h + hi) * w + wi];
  }
};

// Named view of a parameter or state array inside a network.  Grad is null
// for non-trainable state (batchnorm running statistics).
template <typename T>
struct TensorRef {
  std::string name;
  std::vector<T> *value = nullptr;
  std::vector<T> *grad = nullptr;
  std::vector<uint32_t> dims;

  bool trainable() const { return grad != nullptr; }
};

template <typename T>
using TensorRefs = std::vector<TensorRef<T>>;

// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
template <typename T>
void init_uniform_fan_in(std::vector<T> *v, int fan_in, Rng *rng) {
  const double a = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
  for (T &x : *v) x = static_cast<T>(rng->uniform(-a, a));
}

// Copy parameter values between two structurally identical networks, e.g.
// the float production net and its float64 shadow used for finite
// differences.
template <typename A, typename B>
void copy_tensor_refs(const TensorRefs<A> &src, const TensorRefs<B> &dst) {
  if (src.size() != dst.size())
    throw RuntimeError("copy_tensor_refs: network structure mismatch");
  for (size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name || src[i].value->size() != dst[i].value->size())
      throw RuntimeError("copy_tensor_refs: tensor mismatch at " + src[i].name);
    for (size_t j = 0; j < src[i].value->size(); ++j)
      (*dst[i].value)[j] = static_cast<B>((*src[i].value)[j]);
  }
}

template <typename T>
void zero_grads(const TensorRefs<T> &refs) {
  for (const TensorRef<T> &r : refs)
    if (r.grad != nullptr) std::fill(r.grad->begin(), r.grad->end(), T(0));
}

template <typename T>
size_t count_trainable(const TensorRefs<T> &refs) {
  size_t n = 0;
  for (const TensorRef<T> &r : refs)
    if (r.trainable()) n += r.value->size();
  return n;
}

}  // namespace nn
}  // namespace depa

#endif  // DEPA_NN_TENSOR_HPP_
