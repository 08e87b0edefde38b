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

#include "depa/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "depa/nn/adam.hpp"

namespace depa {

void EncoderConfig::validate() const {
  if (embed_dim < 1) throw ValidationError("encoder config: embed_dim must be >= 1");
  for (int c : channels)
    if (c < 1) throw ValidationError("encoder config: channel widths must be >= 1");
  if (kernel != 3 && kernel != 5)
    throw ValidationError("encoder config: kernel must be 3 or 5");
  if (pool_factor != 2) throw ValidationError("encoder config: pool factor must be 2");
}

void DecoderConfig::validate() const {
  for (int c : channels)
    if (c < 1) throw ValidationError("decoder config: channel widths must be >= 1");
}

void PretrainConfig::validate() const {
  if (learning_rate <= 0.0) throw ValidationError("pretrain config: learning rate must be > 0");
  if (epochs < 1) throw ValidationError("pretrain config: epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("pretrain config: batch size must be >= 1");
}

const NamedArray *Checkpoint::find(const std::string &name) const {
  for (const auto &kv : arrays)
    if (kv.first == name) return &kv.second;
  return nullptr;
}

std::string Checkpoint::config_value(const std::string &key) const {
  for (const auto &kv : config)
    if (kv.first == key) return kv.second;
  throw ValidationError("bad checkpoint: missing config key " + key);
}

int Checkpoint::config_int(const std::string &key) const {
  return std::stoi(config_value(key));
}

double Checkpoint::config_double(const std::string &key) const {
  return std::stod(config_value(key));
}

void save_checkpoint(const std::string &path, const Checkpoint &ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeError("cannot write checkpoint: " + path);
  bin::write_bytes(os, "DEPA", 4);
  bin::write_u32(os, 1);  // format version
  if (ckpt.section.size() != 4) throw RuntimeError("checkpoint section tag must be 4 bytes");
  bin::write_bytes(os, ckpt.section.data(), 4);
  bin::write_u32(os, ckpt.epoch);
  bin::write_f32(os, ckpt.final_mean_loss);
  bin::write_u32(os, static_cast<uint32_t>(ckpt.config.size()));
  for (const auto &kv : ckpt.config) {
    bin::write_string(os, kv.first);
    bin::write_string(os, kv.second);
  }
  bin::write_u32(os, static_cast<uint32_t>(ckpt.arrays.size()));
  for (const auto &kv : ckpt.arrays) {
    bin::write_string(os, kv.first);
    bin::write_u32(os, static_cast<uint32_t>(kv.second.dims.size()));
    size_t expect = 1;
    for (uint32_t d : kv.second.dims) {
      bin::write_u32(os, d);
      expect *= d;
    }
    if (expect != kv.second.data.size())
      throw RuntimeError("checkpoint array " + kv.first + " dims do not match data size");
    bin::write_f32_array(os, kv.second.data.data(), kv.second.data.size());
  }
  if (!os) throw RuntimeError("short write: " + path);
}

Checkpoint load_checkpoint(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open checkpoint: " + path);
  char magic[4];
  bin::read_bytes(is, magic, 4, "checkpoint magic");
  if (std::memcmp(magic, "DEPA", 4) != 0) throw ValidationError("bad checkpoint");
  const uint32_t version = bin::read_u32(is, "checkpoint version");
  if (version != 1) throw ValidationError("bad checkpoint: unsupported version");
  Checkpoint ckpt;
  char section[4];
  bin::read_bytes(is, section, 4, "checkpoint section");
  ckpt.section.assign(section, 4);
  ckpt.epoch = bin::read_u32(is, "checkpoint epoch");
  ckpt.final_mean_loss = bin::read_f32(is, "checkpoint loss");
  const uint32_t n_cfg = bin::read_u32(is, "checkpoint config count");
  for (uint32_t i = 0; i < n_cfg; ++i) {
    std::string k = bin::read_string(is, "checkpoint config key");
    std::string v = bin::read_string(is, "checkpoint config value");
    ckpt.config.emplace_back(std::move(k), std::move(v));
  }
  const uint32_t n_arr = bin::read_u32(is, "checkpoint array count");
  for (uint32_t i = 0; i < n_arr; ++i) {
    std::string name = bin::read_string(is, "checkpoint array name");
    NamedArray arr;
    const uint32_t rank = bin::read_u32(is, "checkpoint array rank");
    if (rank > 8) throw ValidationError("bad checkpoint: implausible array rank");
    size_t total = 1;
    for (uint32_t r = 0; r < rank; ++r) {
      arr.dims.push_back(bin::read_u32(is, "checkpoint array dim"));
      total *= arr.dims.back();
    }
    arr.data.resize(total);
    bin::read_f32_array(is, arr.data.data(), total, "checkpoint array data");
    ckpt.arrays.emplace_back(std::move(name), std::move(arr));
  }
  return ckpt;
}

Checkpoint checkpoint_from_refs(const std::string &section,
                                std::vector<std::pair<std::string, std::string>> config,
                                uint32_t epoch, float final_mean_loss,
                                const nn::TensorRefs<float> &refs) {
  Checkpoint ckpt;
  ckpt.section = section;
  ckpt.config = std::move(config);
  ckpt.epoch = epoch;
  ckpt.final_mean_loss = final_mean_loss;
  for (const nn::TensorRef<float> &r : refs) {
    NamedArray arr;
    arr.dims = r.dims;
    arr.data = *r.value;
    ckpt.arrays.emplace_back(r.name, std::move(arr));
  }
  return ckpt;
}

void restore_refs(const Checkpoint &ckpt, const nn::TensorRefs<float> &refs) {
  if (ckpt.arrays.size() != refs.size())
    throw ValidationError("bad checkpoint: expected " + std::to_string(refs.size()) +
                          " arrays, found " + std::to_string(ckpt.arrays.size()));
  for (const nn::TensorRef<float> &r : refs) {
    const NamedArray *arr = ckpt.find(r.name);
    if (arr == nullptr) throw ValidationError("bad checkpoint: missing array " + r.name);
    if (arr->data.size() != r.value->size())
      throw ValidationError("bad checkpoint: array " + r.name + " has wrong size");
    *r.value = arr->data;
  }
}

double embed_loss(const std::vector<float> &m0, const std::vector<float> &m0p, int t_rows,
                  int f_cols) {
  const size_t expect = static_cast<size_t>(t_rows) * f_cols;
  if (m0.size() != expect || m0p.size() != expect)
    throw ValidationError("embed_loss: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < expect; ++i) {
    const double d = static_cast<double>(m0[i]) - static_cast<double>(m0p[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(expect);
}

namespace {

// Derive (k, T, F) from the archive and check that every sample agrees.
void archive_dims(const std::vector<TrainingSample> &samples, int *k, int *t, int *f) {
  if (samples.empty()) throw ValidationError("empty archive");
  const TrainingSample &first = samples.front();
  if (first.center_rows < 1 || first.cols < 1 ||
      first.context_rows % (2 * first.center_rows) != 0)
    throw ValidationError("archive: malformed sample dimensions");
  *t = first.center_rows;
  *f = first.cols;
  *k = first.context_rows / (2 * first.center_rows);
  for (const TrainingSample &s : samples) {
    if (s.center_rows != *t || s.cols != *f || s.context_rows != first.context_rows)
      throw ValidationError("archive: samples disagree on (k, T, F)");
  }
}

std::vector<std::pair<std::string, std::string>> pretrain_config_echo(
    const PretrainConfig &cfg, const EncoderConfig &enc, const DecoderConfig &dec, int k, int t,
    int f) {
  std::ostringstream enc_ch, dec_ch;
  enc_ch << enc.channels[0] << "," << enc.channels[1] << "," << enc.channels[2];
  dec_ch << dec.channels[0] << "," << dec.channels[1] << "," << dec.channels[2];
  return {
      {"embed_dim", std::to_string(enc.embed_dim)},
      {"enc_channels", enc_ch.str()},
      {"dec_channels", dec_ch.str()},
      {"k", std::to_string(k)},
      {"t", std::to_string(t)},
      {"f", std::to_string(f)},
      {"learning_rate", std::to_string(cfg.learning_rate)},
      {"epochs", std::to_string(cfg.epochs)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"seed", std::to_string(cfg.seed)},
  };
}

std::array<int, 3> parse_channels(const std::string &s) {
  std::array<int, 3> out{};
  std::istringstream is(s);
  std::string tok;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(is, tok, ',')) throw ValidationError("bad checkpoint: channel list");
    out[static_cast<size_t>(i)] = std::stoi(tok);
  }
  return out;
}

}  // namespace

PretrainResult pretrain(const std::vector<TrainingSample> &samples, const PretrainConfig &cfg,
                        const EncoderConfig &enc, const DecoderConfig &dec) {
  cfg.validate();
  enc.validate();
  dec.validate();
  int k = 0, t = 0, f = 0;
  archive_dims(samples, &k, &t, &f);
  if (2 * k * t < nn::EncoderNet<float>::kMinInputFrames)
    throw ValidationError("pretrain: context shorter than the encoder minimum of 8 frames");

  Rng rng(cfg.seed);
  Rng init_rng = rng.fork(0x494e4954);      // init stream
  Rng shuffle_rng = rng.fork(0x53485546);   // shuffle stream
  nn::AutoEncoderNet<float> net(f, enc.channels, enc.embed_dim, dec.channels, t, &init_rng);
  nn::TensorRefs<float> refs;
  net.collect(&refs);
  nn::Adam<float> adam(cfg.learning_rate);

  const int ctx_rows = 2 * k * t;
  const size_t n_total = samples.size();
  std::vector<size_t> order(n_total);
  std::iota(order.begin(), order.end(), 0);

  auto make_checkpoint = [&](uint32_t epoch, float loss) {
    return checkpoint_from_refs("PTRN", pretrain_config_echo(cfg, enc, dec, k, t, f), epoch,
                                loss, refs);
  };

  PretrainResult result;
  Checkpoint last_good = make_checkpoint(0, 0.0f);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(&order);
    double loss_sum = 0.0;
    for (size_t begin = 0; begin < n_total; begin += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(n_total, begin + static_cast<size_t>(cfg.batch_size));
      const int bs = static_cast<int>(end - begin);
      nn::Tensor4<float> ctx(bs, 1, ctx_rows, f), cen(bs, 1, t, f);
      for (int b = 0; b < bs; ++b) {
        const TrainingSample &s = samples[order[begin + static_cast<size_t>(b)]];
        std::copy(s.context.begin(), s.context.end(), ctx.plane(b, 0));
        std::copy(s.center.begin(), s.center.end(), cen.plane(b, 0));
      }
      const float batch_loss = net.forward_loss(ctx, cen, /*training=*/true);
      if (!std::isfinite(batch_loss))
        throw DivergedError("diverged at epoch " + std::to_string(epoch + 1), last_good,
                            result.epoch_mean_loss);
      loss_sum += static_cast<double>(batch_loss) * bs;
      nn::zero_grads(refs);
      net.backward();
      adam.step(refs);
    }
    const double mean_loss = loss_sum / static_cast<double>(n_total);
    result.epoch_mean_loss.push_back(mean_loss);
    last_good = make_checkpoint(static_cast<uint32_t>(epoch + 1), static_cast<float>(mean_loss));
  }
  result.checkpoint = std::move(last_good);
  return result;
}

Checkpoint init_checkpoint(const PretrainConfig &cfg, const EncoderConfig &enc,
                           const DecoderConfig &dec, int k, int t, int f) {
  cfg.validate();
  enc.validate();
  dec.validate();
  Rng rng(cfg.seed);
  Rng init_rng = rng.fork(0x494e4954);
  nn::AutoEncoderNet<float> net(f, enc.channels, enc.embed_dim, dec.channels, t, &init_rng);
  nn::TensorRefs<float> refs;
  net.collect(&refs);
  return checkpoint_from_refs("PTRN", pretrain_config_echo(cfg, enc, dec, k, t, f), 0, 0.0f,
                              refs);
}

namespace {

// Rebuild the full autoencoder from a "PTRN" checkpoint.
std::unique_ptr<nn::AutoEncoderNet<float>> net_from_checkpoint(const Checkpoint &ckpt,
                                                               bool randomize) {
  if (ckpt.section != "PTRN") throw ValidationError("bad checkpoint: not a pretrain checkpoint");
  const int embed = ckpt.config_int("embed_dim");
  const int t = ckpt.config_int("t");
  const int f = ckpt.config_int("f");
  const std::array<int, 3> enc_ch = parse_channels(ckpt.config_value("enc_channels"));
  const std::array<int, 3> dec_ch = parse_channels(ckpt.config_value("dec_channels"));
  const uint64_t seed = static_cast<uint64_t>(std::stoull(ckpt.config_value("seed")));
  Rng rng(seed);
  Rng init_rng = rng.fork(0x494e4954);
  auto net = std::make_unique<nn::AutoEncoderNet<float>>(f, enc_ch, embed, dec_ch, t, &init_rng);
  if (!randomize) {
    nn::TensorRefs<float> refs;
    net->collect(&refs);
    restore_refs(ckpt, refs);
  }
  return net;
}

}  // namespace

EncoderRuntime::EncoderRuntime(const Checkpoint &ckpt, bool randomize)
    : net_([&] {
        auto full = net_from_checkpoint(ckpt, randomize);
        return std::move(full->encoder);
      }()) {}

std::vector<float> EncoderRuntime::forward(const float *data, int s_rows, int f_cols) {
  nn::Tensor4<float> x(1, 1, s_rows, f_cols);
  std::copy(data, data + static_cast<size_t>(s_rows) * f_cols, x.v.begin());
  nn::Tensor4<float> v;
  net_.forward(x, /*training=*/false, &v);
  return v.v;
}

std::vector<float> encoder_forward(const Checkpoint &ckpt, const float *data, int s_rows,
                                   int f_cols) {
  EncoderRuntime runtime(ckpt);
  return runtime.forward(data, s_rows, f_cols);
}

std::vector<float> decoder_forward(const Checkpoint &ckpt, const std::vector<float> &v) {
  auto net = net_from_checkpoint(ckpt, false);
  if (static_cast<int>(v.size()) != net->encoder.embed_dim_)
    throw ValidationError("decoder_forward: embedding dimension mismatch");
  nn::Tensor4<float> vt(1, static_cast<int>(v.size()), 1, 1);
  vt.v.assign(v.begin(), v.end());
  nn::Tensor4<float> out;
  net->decoder.forward(vt, /*training=*/false, &out);
  return out.v;
}

void save_loss_trace(const std::string &path, const std::vector<double> &trace) {
  std::ofstream os(path);
  if (!os) throw RuntimeError("cannot write loss trace: " + path);
  os << "epoch,mean_loss\n";
  char buf[64];
  for (size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i + 1, trace[i]);
    os << buf;
  }
  if (!os) throw RuntimeError("short write: " + path);
}

}  // namespace depa
