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

#ifndef DEPA_NN_AUTOENCODER_HPP_
#define DEPA_NN_AUTOENCODER_HPP_

#include <array>
#include <string>

#include "depa/nn/layers.hpp"

namespace depa {
namespace nn {

// The downsampling half: three conv -> avgpool -> batchnorm -> relu blocks,
// then a mean over the time axis and a linear projection to the embedding.
// Fully convolutional over time, so any input with at least
// kMinInputFrames frames maps to the same embedding width.
template <typename T>
struct EncoderNet {
  static constexpr int kMinInputFrames = 8;  // three halvings must keep >= 1 frame

  EncoderNet(int in_bins, const std::array<int, 3> &channels, int embed_dim, Rng *rng)
      : in_bins_(in_bins), embed_dim_(embed_dim) {
    if (in_bins / 8 < 1)
      throw ValidationError("encoder needs at least 8 feature bins for three pooling blocks");
    int prev = 1;
    for (int b = 0; b < 3; ++b) {
      const std::string base = "encoder.block" + std::to_string(b);
      conv[b] = Conv2d<T>(base + ".conv", prev, channels[static_cast<size_t>(b)], 3, 1, rng);
      bn[b] = BatchNorm2d<T>(base + ".bn", channels[static_cast<size_t>(b)]);
      prev = channels[static_cast<size_t>(b)];
    }
    const int out_bins = ((in_bins / 2) / 2) / 2;
    proj = Linear<T>("encoder.proj", prev * out_bins, embed_dim, rng);
  }

  // x: N x 1 x S x F -> v: N x embed_dim.
  void forward(const Tensor4<T> &x, bool training, Tensor4<T> *v) {
    if (x.h < kMinInputFrames) throw ValidationError("segment too short");
    if (x.w != in_bins_)
      throw ValidationError("feature dimension mismatch: got " + std::to_string(x.w) +
                            " bins, encoder expects " + std::to_string(in_bins_));
    Tensor4<T> a = x, b;
    for (int blk = 0; blk < 3; ++blk) {
      conv[blk].forward(a, &b);
      pool[blk].forward(b, &a);
      bn[blk].forward(a, &b, training);
      relu[blk].forward(b, &a);
    }
    gap.forward(a, &b);
    proj.forward(b, v);
  }

  void backward(const Tensor4<T> &dv, Tensor4<T> *dx) {
    Tensor4<T> a, b;
    proj.backward(dv, &a);
    gap.backward(a, &b);
    for (int blk = 2; blk >= 0; --blk) {
      relu[blk].backward(b, &a);
      bn[blk].backward(a, &b);
      pool[blk].backward(b, &a);
      conv[blk].backward(a, &b);
    }
    *dx = std::move(b);
  }

  void collect(TensorRefs<T> *refs) {
    for (int b = 0; b < 3; ++b) {
      conv[b].collect(refs);
      bn[b].collect(refs);
    }
    proj.collect(refs);
  }

  int in_bins_ = 0, embed_dim_ = 0;
  std::array<Conv2d<T>, 3> conv;
  std::array<AvgPool2<T>, 3> pool;
  std::array<BatchNorm2d<T>, 3> bn;
  std::array<Relu<T>, 3> relu;
  TimeAvgPool<T> gap;
  Linear<T> proj;
};

// The upsampling half: a linear seed map, three transposed-conv ->
// batchnorm -> relu blocks doubling both axes, a linear 1x1 projection to
// one channel, and a crop to the exact target shape.
template <typename T>
struct DecoderNet {
  DecoderNet(int embed_dim, const std::array<int, 3> &channels, int target_t, int target_f,
             Rng *rng)
      : target_t_(target_t), target_f_(target_f) {
    seed_t_ = (target_t + 7) / 8;
    seed_f_ = (target_f + 7) / 8;
    seed_ch_ = channels[0];
    seed = Linear<T>("decoder.seed", embed_dim, seed_ch_ * seed_t_ * seed_f_, rng);
    int prev = seed_ch_;
    for (int b = 0; b < 3; ++b) {
      const std::string base = "decoder.block" + std::to_string(b);
      tconv[b] = ConvTranspose2d<T>(base + ".tconv", prev, channels[static_cast<size_t>(b)], rng);
      bn[b] = BatchNorm2d<T>(base + ".bn", channels[static_cast<size_t>(b)]);
      prev = channels[static_cast<size_t>(b)];
    }
    out_proj = Conv2d<T>("decoder.proj", prev, 1, 1, 0, rng);
    crop = Crop2d<T>(target_t, target_f);
  }

  // v: N x embed_dim -> m0p: N x 1 x T x F (linear output, unbounded).
  void forward(const Tensor4<T> &v, bool training, Tensor4<T> *m0p) {
    Tensor4<T> a, b;
    seed.forward(v, &a);
    // Reshape the flat seed activations to (seed_ch, seed_t, seed_f).
    a.c = seed_ch_;
    a.h = seed_t_;
    a.w = seed_f_;
    for (int blk = 0; blk < 3; ++blk) {
      tconv[blk].forward(a, &b);
      bn[blk].forward(b, &a, training);
      relu[blk].forward(a, &b);
      a = std::move(b);
    }
    out_proj.forward(a, &b);
    crop.forward(b, m0p);
  }

  void backward(const Tensor4<T> &dm, Tensor4<T> *dv) {
    Tensor4<T> a, b;
    crop.backward(dm, &a);
    out_proj.backward(a, &b);
    for (int blk = 2; blk >= 0; --blk) {
      relu[blk].backward(b, &a);
      bn[blk].backward(a, &b);
      tconv[blk].backward(b, &a);
      b = std::move(a);
    }
    // Undo the seed reshape.
    b.c = seed.out_dim();
    b.h = 1;
    b.w = 1;
    seed.backward(b, dv);
  }

  void collect(TensorRefs<T> *refs) {
    seed.collect(refs);
    for (int b = 0; b < 3; ++b) {
      tconv[b].collect(refs);
      bn[b].collect(refs);
    }
    out_proj.collect(refs);
  }

  int target_t_ = 0, target_f_ = 0;
  int seed_t_ = 0, seed_f_ = 0, seed_ch_ = 0;
  Linear<T> seed;
  std::array<ConvTranspose2d<T>, 3> tconv;
  std::array<BatchNorm2d<T>, 3> bn;
  std::array<Relu<T>, 3> relu;
  Conv2d<T> out_proj;
  Crop2d<T> crop;
};

// Encoder + decoder trained jointly to predict the held-out center block
// from its context under a mean-squared reconstruction loss.
template <typename T>
struct AutoEncoderNet {
  AutoEncoderNet(int in_bins, const std::array<int, 3> &enc_channels, int embed_dim,
                 const std::array<int, 3> &dec_channels, int target_t, Rng *rng)
      : encoder(in_bins, enc_channels, embed_dim, rng),
        decoder(embed_dim, dec_channels, target_t, in_bins, rng) {}

  // Mean over the batch of per-sample mean squared error.
  T forward_loss(const Tensor4<T> &context, const Tensor4<T> &centers, bool training) {
    encoder.forward(context, training, &embed_);
    decoder.forward(embed_, training, &pred_);
    if (pred_.size() != centers.size()) throw RuntimeError("decoder target shape mismatch");
    centers_ = centers;
    const size_t per = pred_.size() / static_cast<size_t>(pred_.n);
    T acc = T(0);
    for (size_t i = 0; i < pred_.size(); ++i) {
      const T d = pred_.v[i] - centers.v[i];
      acc += d * d;
    }
    return acc / static_cast<T>(per) / static_cast<T>(pred_.n);
  }

  void backward() {
    Tensor4<T> dm(pred_.n, pred_.c, pred_.h, pred_.w);
    const T scale = T(2) / static_cast<T>(pred_.size() / static_cast<size_t>(pred_.n)) /
                    static_cast<T>(pred_.n);
    for (size_t i = 0; i < pred_.size(); ++i)
      dm.v[i] = scale * (pred_.v[i] - centers_.v[i]);
    Tensor4<T> dv, dx;
    decoder.backward(dm, &dv);
    encoder.backward(dv, &dx);
  }

  void collect(TensorRefs<T> *refs) {
    encoder.collect(refs);
    decoder.collect(refs);
  }

  EncoderNet<T> encoder;
  DecoderNet<T> decoder;
  Tensor4<T> embed_, pred_, centers_;
};

}  // namespace nn
}  // namespace depa

#endif  // DEPA_NN_AUTOENCODER_HPP_
