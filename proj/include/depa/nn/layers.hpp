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

#ifndef DEPA_NN_LAYERS_HPP_
#define DEPA_NN_LAYERS_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "depa/nn/tensor.hpp"

namespace depa {
namespace nn {

// Every layer caches what its backward pass needs during forward.  Layers
// are used by exactly one training thread; inference on frozen parameters
// clones the owning network per thread.

// 2D convolution, stride 1, zero padding (kernel 3, pad 1 keeps H x W).
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_ch, int out_ch, int kernel, int pad, Rng *rng)
      : name_(std::move(name)), in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), pad_(pad) {
    weight_.resize(static_cast<size_t>(out_ch) * in_ch * kernel * kernel);
    bias_.resize(static_cast<size_t>(out_ch));
    dweight_.assign(weight_.size(), T(0));
    dbias_.assign(bias_.size(), T(0));
    const int fan_in = in_ch * kernel * kernel;
    init_uniform_fan_in(&weight_, fan_in, rng);
    init_uniform_fan_in(&bias_, fan_in, rng);
  }

  void forward(const Tensor4<T> &x, Tensor4<T> *y) {
    x_ = x;
    y->resize(x.n, out_ch_, x.h, x.w);
    const int H = x.h, W = x.w, K = kernel_, P = pad_;
    for (int n = 0; n < x.n; ++n) {
      for (int co = 0; co < out_ch_; ++co) {
        T *out = y->plane(n, co);
        const T b = bias_[static_cast<size_t>(co)];
        for (int i = 0; i < H * W; ++i) out[i] = b;
        for (int ci = 0; ci < in_ch_; ++ci) {
          const T *in = x.plane(n, ci);
          const T *wk = kernel_ptr(co, ci);
          for (int ky = 0; ky < K; ++ky) {
            for (int kx = 0; kx < K; ++kx) {
              const T wv = wk[ky * K + kx];
              const int ylo = std::max(0, P - ky), yhi = std::min(H, H + P - ky);
              const int xlo = std::max(0, P - kx), xhi = std::min(W, W + P - kx);
              for (int yy = ylo; yy < yhi; ++yy) {
                const T *src = in + (yy + ky - P) * W + (kx - P);
                T *dst = out + yy * W;
                for (int xx = xlo; xx < xhi; ++xx) dst[xx] += wv * src[xx];
              }
            }
          }
        }
      }
    }
  }

  void backward(const Tensor4<T> &dy, Tensor4<T> *dx) {
    const int H = x_.h, W = x_.w, K = kernel_, P = pad_;
    dx->resize(x_.n, in_ch_, H, W);
    for (int n = 0; n < x_.n; ++n) {
      for (int co = 0; co < out_ch_; ++co) {
        const T *g = dy.plane(n, co);
        T acc_b = T(0);
        for (int i = 0; i < H * W; ++i) acc_b += g[i];
        dbias_[static_cast<size_t>(co)] += acc_b;
        for (int ci = 0; ci < in_ch_; ++ci) {
          const T *in = x_.plane(n, ci);
          T *din = dx->plane(n, ci);
          T *dwk = dkernel_ptr(co, ci);
          const T *wk = kernel_ptr(co, ci);
          for (int ky = 0; ky < K; ++ky) {
            for (int kx = 0; kx < K; ++kx) {
              const int ylo = std::max(0, P - ky), yhi = std::min(H, H + P - ky);
              const int xlo = std::max(0, P - kx), xhi = std::min(W, W + P - kx);
              T acc_w = T(0);
              const T wv = wk[ky * K + kx];
              for (int yy = ylo; yy < yhi; ++yy) {
                const T *src = in + (yy + ky - P) * W + (kx - P);
                T *dsrc = din + (yy + ky - P) * W + (kx - P);
                const T *grow = g + yy * W;
                for (int xx = xlo; xx < xhi; ++xx) {
                  acc_w += grow[xx] * src[xx];
                  dsrc[xx] += grow[xx] * wv;
                }
              }
              dwk[ky * K + kx] += acc_w;
            }
          }
        }
      }
    }
  }

  void collect(TensorRefs<T> *refs) {
    refs->push_back({name_ + ".weight", &weight_, &dweight_,
                     {static_cast<uint32_t>(out_ch_), static_cast<uint32_t>(in_ch_),
                      static_cast<uint32_t>(kernel_), static_cast<uint32_t>(kernel_)}});
    refs->push_back({name_ + ".bias", &bias_, &dbias_, {static_cast<uint32_t>(out_ch_)}});
  }

 private:
  T *kernel_ptr(int co, int ci) {
    return weight_.data() + (static_cast<size_t>(co) * in_ch_ + ci) * kernel_ * kernel_;
  }
  T *dkernel_ptr(int co, int ci) {
    return dweight_.data() + (static_cast<size_t>(co) * in_ch_ + ci) * kernel_ * kernel_;
  }

  std::string name_;
  int in_ch_ = 0, out_ch_ = 0, kernel_ = 3, pad_ = 1;
  std::vector<T> weight_, bias_, dweight_, dbias_;
  Tensor4<T> x_;
};

// Transposed convolution with kernel 2, stride 2: exactly doubles H and W.
template <typename T>
class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(std::string name, int in_ch, int out_ch, Rng *rng)
      : name_(std::move(name)), in_ch_(in_ch), out_ch_(out_ch) {
    weight_.resize(static_cast<size_t>(in_ch) * out_ch * 4);
    bias_.resize(static_cast<size_t>(out_ch));
    dweight_.assign(weight_.size(), T(0));
    dbias_.assign(bias_.size(), T(0));
    const int fan_in = in_ch * 4;
    init_uniform_fan_in(&weight_, fan_in, rng);
    init_uniform_fan_in(&bias_, fan_in, rng);
  }

  void forward(const Tensor4<T> &x, Tensor4<T> *y) {
    x_ = x;
    const int H = x.h, W = x.w;
    y->resize(x.n, out_ch_, 2 * H, 2 * W);
    for (int n = 0; n < x.n; ++n) {
      for (int co = 0; co < out_ch_; ++co) {
        T *out = y->plane(n, co);
        const T b = bias_[static_cast<size_t>(co)];
        for (int i = 0; i < 4 * H * W; ++i) out[i] = b;
        for (int ci = 0; ci < in_ch_; ++ci) {
          const T *in = x.plane(n, ci);
          const T *wk = kernel_ptr(ci, co);
          for (int yy = 0; yy < H; ++yy) {
            const T *src = in + yy * W;
            T *d0 = out + (2 * yy) * (2 * W);
            T *d1 = out + (2 * yy + 1) * (2 * W);
            for (int xx = 0; xx < W; ++xx) {
              const T v = src[xx];
              d0[2 * xx] += v * wk[0];
              d0[2 * xx + 1] += v * wk[1];
              d1[2 * xx] += v * wk[2];
              d1[2 * xx + 1] += v * wk[3];
            }
          }
        }
      }
    }
  }

  void backward(const Tensor4<T> &dy, Tensor4<T> *dx) {
    const int H = x_.h, W = x_.w;
    dx->resize(x_.n, in_ch_, H, W);
    for (int n = 0; n < x_.n; ++n) {
      for (int co = 0; co < out_ch_; ++co) {
        const T *g = dy.plane(n, co);
        T acc_b = T(0);
        for (int i = 0; i < 4 * H * W; ++i) acc_b += g[i];
        dbias_[static_cast<size_t>(co)] += acc_b;
        for (int ci = 0; ci < in_ch_; ++ci) {
          const T *in = x_.plane(n, ci);
          T *din = dx->plane(n, ci);
          const T *wk = kernel_ptr(ci, co);
          T *dwk = dkernel_ptr(ci, co);
          T dw0 = T(0), dw1 = T(0), dw2 = T(0), dw3 = T(0);
          for (int yy = 0; yy < H; ++yy) {
            const T *src = in + yy * W;
            T *dsrc = din + yy * W;
            const T *g0 = g + (2 * yy) * (2 * W);
            const T *g1 = g + (2 * yy + 1) * (2 * W);
            for (int xx = 0; xx < W; ++xx) {
              const T v = src[xx];
              dw0 += g0[2 * xx] * v;
              dw1 += g0[2 * xx + 1] * v;
              dw2 += g1[2 * xx] * v;
              dw3 += g1[2 * xx + 1] * v;
              dsrc[xx] += g0[2 * xx] * wk[0] + g0[2 * xx + 1] * wk[1] +
                          g1[2 * xx] * wk[2] + g1[2 * xx + 1] * wk[3];
            }
          }
          dwk[0] += dw0;
          dwk[1] += dw1;
          dwk[2] += dw2;
          dwk[3] += dw3;
        }
      }
    }
  }

  void collect(TensorRefs<T> *refs) {
    refs->push_back({name_ + ".weight", &weight_, &dweight_,
                     {static_cast<uint32_t>(in_ch_), static_cast<uint32_t>(out_ch_), 2u, 2u}});
    refs->push_back({name_ + ".bias", &bias_, &dbias_, {static_cast<uint32_t>(out_ch_)}});
  }

 private:
  T *kernel_ptr(int ci, int co) {
    return weight_.data() + (static_cast<size_t>(ci) * out_ch_ + co) * 4;
  }
  T *dkernel_ptr(int ci, int co) {
    return dweight_.data() + (static_cast<size_t>(ci) * out_ch_ + co) * 4;
  }

  std::string name_;
  int in_ch_ = 0, out_ch_ = 0;
  std::vector<T> weight_, bias_, dweight_, dbias_;
  Tensor4<T> x_;
};

// 2x2 average pooling, stride 2, floor semantics: a trailing odd row or
// column is discarded.
template <typename T>
class AvgPool2 {
 public:
  void forward(const Tensor4<T> &x, Tensor4<T> *y) {
    in_h_ = x.h;
    in_w_ = x.w;
    const int oh = x.h / 2, ow = x.w / 2;
    if (oh < 1 || ow < 1) throw ValidationError("segment too short");
    y->resize(x.n, x.c, oh, ow);
    for (int n = 0; n < x.n; ++n) {
      for (int c = 0; c < x.c; ++c) {
        const T *in = x.plane(n, c);
        T *out = y->plane(n, c);
        for (int yy = 0; yy < oh; ++yy) {
          const T *r0 = in + (2 * yy) * x.w;
          const T *r1 = in + (2 * yy + 1) * x.w;
          for (int xx = 0; xx < ow; ++xx) {
            out[yy * ow + xx] =
                (r0[2 * xx] + r0[2 * xx + 1] + r1[2 * xx] + r1[2 * xx + 1]) * T(0.25);
          }
        }
      }
    }
  }

  void backward(const Tensor4<T> &dy, Tensor4<T> *dx) {
    dx->resize(dy.n, dy.c, in_h_, in_w_);
    for (int n = 0; n < dy.n; ++n) {
      for (int c = 0; c < dy.c; ++c) {
        const T *g = dy.plane(n, c);
        T *din = dx->plane(n, c);
        for (int yy = 0; yy < dy.h; ++yy) {
          T *r0 = din + (2 * yy) * in_w_;
          T *r1 = din + (2 * yy + 1) * in_w_;
          for (int xx = 0; xx < dy.w; ++xx) {
            const T v = g[yy * dy.w + xx] * T(0.25);
            r0[2 * xx] += v;
            r0[2 * xx + 1] += v;
            r1[2 * xx] += v;
            r1[2 * xx + 1] += v;
          }
        }
      }
    }
  }

 private:
  int in_h_ = 0, in_w_ = 0;
};

// Per-channel batch normalization over (N, H, W).  Training mode uses batch
// statistics and updates running averages with momentum 0.1; evaluation mode
// uses the frozen running averages.
template <typename T>
class BatchNorm2d {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.1;

  BatchNorm2d() = default;
  BatchNorm2d(std::string name, int channels) : name_(std::move(name)), ch_(channels) {
    gamma_.assign(static_cast<size_t>(channels), T(1));
    beta_.assign(static_cast<size_t>(channels), T(0));
    dgamma_.assign(static_cast<size_t>(channels), T(0));
    dbeta_.assign(static_cast<size_t>(channels), T(0));
    running_mean_.assign(static_cast<size_t>(channels), T(0));
    running_var_.assign(static_cast<size_t>(channels), T(1));
  }

  void forward(const Tensor4<T> &x, Tensor4<T> *y, bool training) {
    x_ = x;
    training_ = training;
    const size_t m = static_cast<size_t>(x.n) * x.h * x.w;
    y->resize(x.n, x.c, x.h, x.w);
    mean_.assign(static_cast<size_t>(ch_), T(0));
    inv_std_.assign(static_cast<size_t>(ch_), T(0));
    for (int c = 0; c < ch_; ++c) {
      T mu, var;
      if (training) {
        T acc = T(0);
        for (int n = 0; n < x.n; ++n) {
          const T *in = x.plane(n, c);
          for (size_t i = 0; i < static_cast<size_t>(x.h) * x.w; ++i) acc += in[i];
        }
        mu = acc / static_cast<T>(m);
        T acc2 = T(0);
        for (int n = 0; n < x.n; ++n) {
          const T *in = x.plane(n, c);
          for (size_t i = 0; i < static_cast<size_t>(x.h) * x.w; ++i) {
            const T d = in[i] - mu;
            acc2 += d * d;
          }
        }
        var = acc2 / static_cast<T>(m);
        running_mean_[c] = static_cast<T>((1.0 - kMomentum) * running_mean_[c] + kMomentum * mu);
        running_var_[c] = static_cast<T>((1.0 - kMomentum) * running_var_[c] + kMomentum * var);
      } else {
        mu = running_mean_[c];
        var = running_var_[c];
      }
      const T istd = T(1) / std::sqrt(var + static_cast<T>(kEps));
      mean_[c] = mu;
      inv_std_[c] = istd;
      const T g = gamma_[c], b = beta_[c];
      for (int n = 0; n < x.n; ++n) {
        const T *in = x.plane(n, c);
        T *out = y->plane(n, c);
        for (size_t i = 0; i < static_cast<size_t>(x.h) * x.w; ++i)
          out[i] = (in[i] - mu) * istd * g + b;
      }
    }
  }

  void backward(const Tensor4<T> &dy, Tensor4<T> *dx) {
    const size_t m = static_cast<size_t>(x_.n) * x_.h * x_.w;
    dx->resize(x_.n, x_.c, x_.h, x_.w);
    const size_t plane = static_cast<size_t>(x_.h) * x_.w;
    for (int c = 0; c < ch_; ++c) {
      const T mu = mean_[c], istd = inv_std_[c], g = gamma_[c];
      // Accumulate sum(dy) and sum(dy * xhat).
      T sum_dy = T(0), sum_dy_xhat = T(0);
      for (int n = 0; n < x_.n; ++n) {
        const T *in = x_.plane(n, c);
        const T *gr = dy.plane(n, c);
        for (size_t i = 0; i < plane; ++i) {
          const T xhat = (in[i] - mu) * istd;
          sum_dy += gr[i];
          sum_dy_xhat += gr[i] * xhat;
        }
      }
      dgamma_[c] += sum_dy_xhat;
      dbeta_[c] += sum_dy;
      if (training_) {
        const T inv_m = T(1) / static_cast<T>(m);
        for (int n = 0; n < x_.n; ++n) {
          const T *in = x_.plane(n, c);
          const T *gr = dy.plane(n, c);
          T *out = dx->plane(n, c);
          for (size_t i = 0; i < plane; ++i) {
            const T xhat = (in[i] - mu) * istd;
            out[i] = g * istd * (gr[i] - inv_m * sum_dy - xhat * inv_m * sum_dy_xhat);
          }
        }
      } else {
        // Running statistics are constants in evaluation mode.
        for (int n = 0; n < x_.n; ++n) {
          const T *gr = dy.plane(n, c);
          T *out = dx->plane(n, c);
          for (size_t i = 0; i < plane; ++i) out[i] = gr[i] * g * istd;
        }
      }
    }
  }

  void collect(TensorRefs<T> *refs) {
    const std::vector<uint32_t> d{static_cast<uint32_t>(ch_)};
    refs->push_back({name_ + ".gamma", &gamma_, &dgamma_, d});
    refs->push_back({name_ + ".beta", &beta_, &dbeta_, d});
    refs->push_back({name_ + ".running_mean", &running_mean_, nullptr, d});
    refs->push_back({name_ + ".running_var", &running_var_, nullptr, d});
  }

 private:
  std::string name_;
  int ch_ = 0;
  bool training_ = true;
  std::vector<T> gamma_, beta_, dgamma_, dbeta_;
  std::vector<T> running_mean_, running_var_;
  std::vector<T> mean_, inv_std_;
  Tensor4<T> x_;
};

template <typename T>
class Relu {
 public:
  void forward(const Tensor4<T> &x, Tensor4<T> *y) {
    y->resize(x.n, x.c, x.h, x.w);
    mask_.assign(x.size(), 0);
    for (size_t i = 0; i < x.size(); ++i) {
      const bool pos = x.v[i] > T(0);
      mask_[i] = pos;
      y->v[i] = pos ? x.v[i] : T(0);
    }
  }

  void backward(const Tensor4<T> &dy, Tensor4<T> *dx) {
    dx->resize(dy.n, dy.c, dy.h, dy.w);
    for (size_t i = 0; i < dy.size(); ++i) dx->v[i] = mask_[i] ? dy.v[i] : T(0);
  }

 private:
  std::vector<char> mask_;
};

// Mean over the time axis (H): N x C x H x W -> N x C x 1 x W.  Makes the
// encoder's output independent of input length.
template <typename T>
class TimeAvgPool {
 public:
  void forward(const Tensor4<T> &x, Tensor4<T> *y) {
    in_h_ = x.h;
    y->resize(x.n, x.c, 1, x.w);
    const T inv = T(1) / static_cast<T>(x.h);
    for (int n = 0; n < x.n; ++n) {
      for (int c = 0; c < x.c; ++c) {
        const T *in = x.plane(n, c);
        T *out = y->plane(n, c);
        for (int xx = 0; xx < x.w; ++xx) {
          T acc = T(0);
          for (int yy = 0; yy < x.h; ++yy) acc += in[yy * x.w + xx];
          out[xx] = acc * inv;
        }
      }
    }
  }

  void backward(const Tensor4<T> &dy, Tensor4<T> *dx) {
    dx->resize(dy.n, dy.c, in_h_, dy.w);
    const T inv = T(1) / static_cast<T>(in_h_);
    for (int n = 0; n < dy.n; ++n) {
      for (int c = 0; c < dy.c; ++c) {
        const T *g = dy.plane(n, c);
        T *out = dx->plane(n, c);
        for (int yy = 0; yy < in_h_; ++yy)
          for (int xx = 0; xx < dy.w; ++xx) out[yy * dy.w + xx] = g[xx] * inv;
      }
    }
  }

 private:
  int in_h_ = 0;
};

// Fully connected layer on flattened activations: N x (C*H*W) -> N x Out.
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int in_dim, int out_dim, Rng *rng)
      : name_(std::move(name)), in_(in_dim), out_(out_dim) {
    weight_.resize(static_cast<size_t>(out_dim) * in_dim);
    bias_.resize(static_cast<size_t>(out_dim));
    dweight_.assign(weight_.size(), T(0));
    dbias_.assign(bias_.size(), T(0));
    init_uniform_fan_in(&weight_, in_dim, rng);
    init_uniform_fan_in(&bias_, in_dim, rng);
  }

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }

  void forward(const Tensor4<T> &x, Tensor4<T> *y) {
    const int flat = x.c * x.h * x.w;
    if (flat != in_)
      throw ValidationError("linear layer " + name_ + ": input width " + std::to_string(flat) +
                            " != " + std::to_string(in_));
    x_ = x;
    y->resize(x.n, out_, 1, 1);
    for (int n = 0; n < x.n; ++n) {
      const T *in = x.v.data() + static_cast<size_t>(n) * in_;
      T *out = y->v.data() + static_cast<size_t>(n) * out_;
      for (int o = 0; o < out_; ++o) {
        const T *w = weight_.data() + static_cast<size_t>(o) * in_;
        T acc = bias_[static_cast<size_t>(o)];
        for (int i = 0; i < in_; ++i) acc += w[i] * in[i];
        out[o] = acc;
      }
    }
  }

  void backward(const Tensor4<T> &dy, Tensor4<T> *dx) {
    dx->resize(x_.n, x_.c, x_.h, x_.w);
    for (int n = 0; n < x_.n; ++n) {
      const T *in = x_.v.data() + static_cast<size_t>(n) * in_;
      const T *g = dy.v.data() + static_cast<size_t>(n) * out_;
      T *din = dx->v.data() + static_cast<size_t>(n) * in_;
      for (int o = 0; o < out_; ++o) {
        const T go = g[o];
        dbias_[static_cast<size_t>(o)] += go;
        const T *w = weight_.data() + static_cast<size_t>(o) * in_;
        T *dw = dweight_.data() + static_cast<size_t>(o) * in_;
        for (int i = 0; i < in_; ++i) {
          dw[i] += go * in[i];
          din[i] += go * w[i];
        }
      }
    }
  }

  void collect(TensorRefs<T> *refs) {
    refs->push_back({name_ + ".weight", &weight_, &dweight_,
                     {static_cast<uint32_t>(out_), static_cast<uint32_t>(in_)}});
    refs->push_back({name_ + ".bias", &bias_, &dbias_, {static_cast<uint32_t>(out_)}});
  }

 private:
  std::string name_;
  int in_ = 0, out_ = 0;
  std::vector<T> weight_, bias_, dweight_, dbias_;
  Tensor4<T> x_;
};

// Top-left crop to (target_h, target_w); inverse zero-pads.
template <typename T>
class Crop2d {
 public:
  Crop2d() = default;
  Crop2d(int target_h, int target_w) : th_(target_h), tw_(target_w) {}

  void forward(const Tensor4<T> &x, Tensor4<T> *y) {
    if (x.h < th_ || x.w < tw_) throw RuntimeError("crop target larger than input");
    in_h_ = x.h;
    in_w_ = x.w;
    y->resize(x.n, x.c, th_, tw_);
    for (int n = 0; n < x.n; ++n)
      for (int c = 0; c < x.c; ++c) {
        const T *in = x.plane(n, c);
        T *out = y->plane(n, c);
        for (int yy = 0; yy < th_; ++yy)
          for (int xx = 0; xx < tw_; ++xx) out[yy * tw_ + xx] = in[yy * in_w_ + xx];
      }
  }

  void backward(const Tensor4<T> &dy, Tensor4<T> *dx) {
    dx->resize(dy.n, dy.c, in_h_, in_w_);
    for (int n = 0; n < dy.n; ++n)
      for (int c = 0; c < dy.c; ++c) {
        const T *g = dy.plane(n, c);
        T *out = dx->plane(n, c);
        for (int yy = 0; yy < th_; ++yy)
          for (int xx = 0; xx < tw_; ++xx) out[yy * in_w_ + xx] = g[yy * tw_ + xx];
      }
  }

 private:
  int th_ = 0, tw_ = 0, in_h_ = 0, in_w_ = 0;
};

}  // namespace nn
}  // namespace depa

#endif  // DEPA_NN_LAYERS_HPP_
