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

#ifndef DEPA_NN_LSTM_HPP_
#define DEPA_NN_LSTM_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "depa/nn/tensor.hpp"

namespace depa {
namespace nn {

// Step-major matrix for sequence activations: len x dim.
template <typename T>
struct SeqMat {
  int len = 0, dim = 0;
  std::vector<T> v;

  SeqMat() = default;
  SeqMat(int len_, int dim_) { resize(len_, dim_); }
  void resize(int len_, int dim_) {
    len = len_;
    dim = dim_;
    v.assign(static_cast<size_t>(len) * dim, T(0));
  }
  T *row(int t) { return v.data() + static_cast<size_t>(t) * dim; }
  const T *row(int t) const { return v.data() + static_cast<size_t>(t) * dim; }
};

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// A single LSTM direction.  Gate order in the stacked weight matrices is
// input, forget, cell, output.
template <typename T>
class LstmDir {
 public:
  LstmDir() = default;
  LstmDir(std::string name, int in_dim, int hidden, Rng *rng)
      : name_(std::move(name)), in_(in_dim), hidden_(hidden) {
    w_ih_.resize(static_cast<size_t>(4 * hidden) * in_dim);
    w_hh_.resize(static_cast<size_t>(4 * hidden) * hidden);
    b_ih_.resize(static_cast<size_t>(4 * hidden));
    b_hh_.resize(static_cast<size_t>(4 * hidden));
    dw_ih_.assign(w_ih_.size(), T(0));
    dw_hh_.assign(w_hh_.size(), T(0));
    db_ih_.assign(b_ih_.size(), T(0));
    db_hh_.assign(b_hh_.size(), T(0));
    init_uniform_fan_in(&w_ih_, in_dim, rng);
    init_uniform_fan_in(&b_ih_, in_dim, rng);
    init_uniform_fan_in(&w_hh_, hidden, rng);
    init_uniform_fan_in(&b_hh_, hidden, rng);
  }

  // h_out: len x hidden in physical (input) step order.  With reverse set
  // the recurrence runs from the last step to the first.
  void forward(const SeqMat<T> &x, bool reverse, SeqMat<T> *h_out) {
    const int len = x.len, H = hidden_;
    x_ = x;
    reverse_ = reverse;
    gates_.resize(len, 4 * H);  // post-activation i, f, g, o
    cells_.resize(len, H);
    tanh_c_.resize(len, H);
    h_out->resize(len, H);
    h_out_ = h_out;

    std::vector<T> h_prev(H, T(0)), c_prev(H, T(0)), a(4 * H);
    for (int step = 0; step < len; ++step) {
      const int t = reverse ? len - 1 - step : step;
      const T *xt = x.row(t);
      for (int j = 0; j < 4 * H; ++j) {
        const T *wi = w_ih_.data() + static_cast<size_t>(j) * in_;
        const T *wh = w_hh_.data() + static_cast<size_t>(j) * H;
        T acc = b_ih_[static_cast<size_t>(j)] + b_hh_[static_cast<size_t>(j)];
        for (int i = 0; i < in_; ++i) acc += wi[i] * xt[i];
        for (int i = 0; i < H; ++i) acc += wh[i] * h_prev[static_cast<size_t>(i)];
        a[static_cast<size_t>(j)] = acc;
      }
      T *gates = gates_.row(t);
      T *cell = cells_.row(t);
      T *tc = tanh_c_.row(t);
      T *ht = h_out->row(t);
      for (int i = 0; i < H; ++i) {
        const T gi = sigmoid(a[static_cast<size_t>(i)]);
        const T gf = sigmoid(a[static_cast<size_t>(H + i)]);
        const T gg = std::tanh(a[static_cast<size_t>(2 * H + i)]);
        const T go = sigmoid(a[static_cast<size_t>(3 * H + i)]);
        const T c = gf * c_prev[static_cast<size_t>(i)] + gi * gg;
        gates[i] = gi;
        gates[H + i] = gf;
        gates[2 * H + i] = gg;
        gates[3 * H + i] = go;
        cell[i] = c;
        tc[i] = std::tanh(c);
        ht[i] = go * tc[i];
      }
      std::copy(h_out->row(t), h_out->row(t) + H, h_prev.begin());
      std::copy(cell, cell + H, c_prev.begin());
    }
  }

  // dh: len x hidden gradient on the outputs; dx accumulates len x in_dim.
  void backward(const SeqMat<T> &dh, SeqMat<T> *dx) {
    const int len = x_.len, H = hidden_;
    dx->resize(len, in_);
    std::vector<T> dh_next(H, T(0)), dc_next(H, T(0)), da(4 * H);
    for (int step = len - 1; step >= 0; --step) {
      const int t = reverse_ ? len - 1 - step : step;
      const int t_prev = reverse_ ? t + 1 : t - 1;  // previous step in recurrence order
      const bool has_prev = step > 0;
      const T *gates = gates_.row(t);
      const T *tc = tanh_c_.row(t);
      const T *c_prev = has_prev ? cells_.row(t_prev) : nullptr;
      const T *h_prev = has_prev ? h_out_->row(t_prev) : nullptr;
      const T *xt = x_.row(t);

      for (int i = 0; i < H; ++i) {
        const T gi = gates[i], gf = gates[H + i], gg = gates[2 * H + i], go = gates[3 * H + i];
        const T dht = dh.row(t)[i] + dh_next[static_cast<size_t>(i)];
        const T dct = dht * go * (T(1) - tc[i] * tc[i]) + dc_next[static_cast<size_t>(i)];
        const T cp = has_prev ? c_prev[i] : T(0);
        da[static_cast<size_t>(i)] = dct * gg * gi * (T(1) - gi);
        da[static_cast<size_t>(H + i)] = dct * cp * gf * (T(1) - gf);
        da[static_cast<size_t>(2 * H + i)] = dct * gi * (T(1) - gg * gg);
        da[static_cast<size_t>(3 * H + i)] = dht * tc[i] * go * (T(1) - go);
        dc_next[static_cast<size_t>(i)] = dct * gf;
      }

      std::fill(dh_next.begin(), dh_next.end(), T(0));
      T *dxt = dx->row(t);
      for (int j = 0; j < 4 * H; ++j) {
        const T d = da[static_cast<size_t>(j)];
        db_ih_[static_cast<size_t>(j)] += d;
        db_hh_[static_cast<size_t>(j)] += d;
        T *dwi = dw_ih_.data() + static_cast<size_t>(j) * in_;
        const T *wi = w_ih_.data() + static_cast<size_t>(j) * in_;
        for (int i = 0; i < in_; ++i) {
          dwi[i] += d * xt[i];
          dxt[i] += d * wi[i];
        }
        T *dwh = dw_hh_.data() + static_cast<size_t>(j) * H;
        const T *wh = w_hh_.data() + static_cast<size_t>(j) * H;
        if (has_prev) {
          for (int i = 0; i < H; ++i) {
            dwh[i] += d * h_prev[i];
            dh_next[static_cast<size_t>(i)] += d * wh[i];
          }
        }
      }
    }
  }

  void collect(TensorRefs<T> *refs) {
    refs->push_back({name_ + ".w_ih", &w_ih_, &dw_ih_,
                     {static_cast<uint32_t>(4 * hidden_), static_cast<uint32_t>(in_)}});
    refs->push_back({name_ + ".w_hh", &w_hh_, &dw_hh_,
                     {static_cast<uint32_t>(4 * hidden_), static_cast<uint32_t>(hidden_)}});
    refs->push_back({name_ + ".b_ih", &b_ih_, &db_ih_, {static_cast<uint32_t>(4 * hidden_)}});
    refs->push_back({name_ + ".b_hh", &b_hh_, &db_hh_, {static_cast<uint32_t>(4 * hidden_)}});
  }

 private:
  std::string name_;
  int in_ = 0, hidden_ = 0;
  bool reverse_ = false;
  std::vector<T> w_ih_, w_hh_, b_ih_, b_hh_;
  std::vector<T> dw_ih_, dw_hh_, db_ih_, db_hh_;
  SeqMat<T> x_, gates_, cells_, tanh_c_;
  SeqMat<T> *h_out_ = nullptr;
};

// One bidirectional layer: forward and backward direction outputs
// concatenated per step to 2 x hidden.
template <typename T>
class BlstmLayer {
 public:
  BlstmLayer() = default;
  BlstmLayer(const std::string &name, int in_dim, int hidden, Rng *rng)
      : fwd_(name + ".fwd", in_dim, hidden, rng),
        bwd_(name + ".bwd", in_dim, hidden, rng),
        hidden_(hidden) {}

  void forward(const SeqMat<T> &x, SeqMat<T> *y) {
    fwd_.forward(x, false, &h_fwd_);
    bwd_.forward(x, true, &h_bwd_);
    y->resize(x.len, 2 * hidden_);
    for (int t = 0; t < x.len; ++t) {
      std::copy(h_fwd_.row(t), h_fwd_.row(t) + hidden_, y->row(t));
      std::copy(h_bwd_.row(t), h_bwd_.row(t) + hidden_, y->row(t) + hidden_);
    }
  }

  void backward(const SeqMat<T> &dy, SeqMat<T> *dx) {
    SeqMat<T> dh_f(dy.len, hidden_), dh_b(dy.len, hidden_);
    for (int t = 0; t < dy.len; ++t) {
      std::copy(dy.row(t), dy.row(t) + hidden_, dh_f.row(t));
      std::copy(dy.row(t) + hidden_, dy.row(t) + 2 * hidden_, dh_b.row(t));
    }
    SeqMat<T> dx_f, dx_b;
    fwd_.backward(dh_f, &dx_f);
    bwd_.backward(dh_b, &dx_b);
    dx->resize(dy.len, dx_f.dim);
    for (size_t i = 0; i < dx->v.size(); ++i) dx->v[i] = dx_f.v[i] + dx_b.v[i];
  }

  void collect(TensorRefs<T> *refs) {
    fwd_.collect(refs);
    bwd_.collect(refs);
  }

 private:
  LstmDir<T> fwd_, bwd_;
  SeqMat<T> h_fwd_, h_bwd_;
  int hidden_ = 0;
};

// Inverted dropout on sequence activations; identity in evaluation mode.
template <typename T>
class SeqDropout {
 public:
  explicit SeqDropout(double rate = 0.0) : rate_(rate) {}

  void forward(const SeqMat<T> &x, bool training, Rng *rng, SeqMat<T> *y) {
    y->resize(x.len, x.dim);
    if (!training || rate_ <= 0.0) {
      dropped_ = false;
      y->v = x.v;
      return;
    }
    dropped_ = true;
    scale_ = T(1.0 / (1.0 - rate_));
    mask_.assign(x.v.size(), 1);
    for (size_t i = 0; i < x.v.size(); ++i) {
      if (rng->uniform() < rate_) {
        mask_[i] = 0;
        y->v[i] = T(0);
      } else {
        y->v[i] = x.v[i] * scale_;
      }
    }
  }

  void backward(const SeqMat<T> &dy, SeqMat<T> *dx) {
    dx->resize(dy.len, dy.dim);
    if (!dropped_) {
      dx->v = dy.v;
      return;
    }
    for (size_t i = 0; i < dy.v.size(); ++i) dx->v[i] = mask_[i] ? dy.v[i] * scale_ : T(0);
  }

 private:
  double rate_ = 0.0;
  bool dropped_ = false;
  T scale_ = T(1);
  std::vector<char> mask_;
};

}  // namespace nn
}  // namespace depa

#endif  // DEPA_NN_LSTM_HPP_
