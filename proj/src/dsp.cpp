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

#include "depa/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "depa/common.hpp"

namespace depa {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (n - 1));
  return w;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

void fft_radix2(std::vector<double> *re_p, std::vector<double> *im_p, bool inverse) {
  std::vector<double> &re = *re_p;
  std::vector<double> &im = *im_p;
  const size_t n = re.size();
  if (n != im.size() || !is_power_of_two(static_cast<int>(n)))
    throw RuntimeError("fft size must be a power of two");

  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (size_t i = 0; i < n; i += len) {
      double cur_r = 1.0, cur_i = 0.0;
      for (size_t k = 0; k < len / 2; ++k) {
        const size_t a = i + k, b = i + k + len / 2;
        const double ur = re[a], ui = im[a];
        const double vr = re[b] * cur_r - im[b] * cur_i;
        const double vi = re[b] * cur_i + im[b] * cur_r;
        re[a] = ur + vr;
        im[a] = ui + vi;
        re[b] = ur - vr;
        im[b] = ui - vi;
        const double nr = cur_r * wr - cur_i * wi;
        cur_i = cur_r * wi + cur_i * wr;
        cur_r = nr;
      }
    }
  }

  if (inverse) {
    for (size_t i = 0; i < n; ++i) {
      re[i] /= static_cast<double>(n);
      im[i] /= static_cast<double>(n);
    }
  }
}

int window_samples(double window_ms, int sample_rate_hz) {
  // Snap to the nearest power of two so the FFT stays radix-2; at 22050 Hz
  // the 93 ms window becomes 2048 samples.
  const double exact = window_ms * 1e-3 * sample_rate_hz;
  const int up = next_power_of_two(std::max(2, static_cast<int>(std::ceil(exact))));
  const int down = up / 2;
  return (exact - down <= up - exact) ? down : up;
}

int hop_samples(double hop_ms, int sample_rate_hz) {
  // Quarter-window hop at the defaults: 23 ms at 22050 Hz -> 512 samples.
  const double exact = hop_ms * 1e-3 * sample_rate_hz;
  const int up = next_power_of_two(std::max(1, static_cast<int>(std::ceil(exact))));
  const int down = up / 2;
  return (exact - down <= up - exact) ? down : up;
}

int64_t num_frames(int64_t num_samples, int win, int hop) {
  if (num_samples < win) return 0;
  return 1 + (num_samples - win) / hop;
}

Waveform resample(const Waveform &wav, int target_rate_hz) {
  if (wav.samples.empty()) throw ValidationError("empty waveform");
  if (wav.sample_rate_hz <= 0) throw ValidationError("invalid sample rate");
  if (target_rate_hz <= 0) throw ValidationError("invalid target rate");
  if (wav.sample_rate_hz == target_rate_hz) return wav;

  const double in_rate = wav.sample_rate_hz;
  const double out_rate = target_rate_hz;
  const double ratio = in_rate / out_rate;
  // Cutoff at the smaller Nyquist, slightly rolled off to tame the
  // transition band of the finite kernel.
  const double cutoff = 0.97 * std::min(1.0, out_rate / in_rate);  // x pi rad/sample (input)
  const int kHalfTaps = 32;  // kernel half-width in input samples at the cutoff rate
  const double half_width = kHalfTaps / std::min(1.0, out_rate / in_rate);

  const int64_t n_in = static_cast<int64_t>(wav.samples.size());
  const int64_t n_out = llround(static_cast<double>(n_in) * out_rate / in_rate);

  Waveform out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(static_cast<size_t>(n_out));

  for (int64_t j = 0; j < n_out; ++j) {
    const double center = static_cast<double>(j) * ratio;
    const int64_t lo = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(center - half_width)));
    const int64_t hi = std::min<int64_t>(n_in - 1, static_cast<int64_t>(std::floor(center + half_width)));
    double acc = 0.0;
    for (int64_t i = lo; i <= hi; ++i) {
      const double x = static_cast<double>(i) - center;
      double sinc;
      if (std::abs(x) < 1e-12) {
        sinc = cutoff;
      } else {
        sinc = std::sin(kPi * cutoff * x) / (kPi * x);
      }
      // Hann taper over the kernel support.
      const double t = x / half_width;
      const double wnd = 0.5 + 0.5 * std::cos(kPi * std::clamp(t, -1.0, 1.0));
      acc += static_cast<double>(wav.samples[static_cast<size_t>(i)]) * sinc * wnd;
    }
    out.samples[static_cast<size_t>(j)] = static_cast<float>(acc);
  }
  return out;
}

Spectrogram stft_log_power(const Waveform &wav, const StftOptions &opts) {
  if (wav.sample_rate_hz <= 0) throw ValidationError("invalid sample rate");
  const int win = window_samples(opts.window_ms, wav.sample_rate_hz);
  const int hop = hop_samples(opts.hop_ms, wav.sample_rate_hz);
  const int full_bins = win / 2 + 1;
  if (opts.out_bins <= 0 || opts.out_bins > full_bins)
    throw ValidationError("out_bins must be in [1, n_fft/2+1]");

  const int64_t frames = num_frames(static_cast<int64_t>(wav.samples.size()), win, hop);

  Spectrogram spec;
  spec.num_frames = static_cast<int>(frames);
  spec.num_bins = opts.out_bins;
  spec.hop_seconds = static_cast<double>(hop) / wav.sample_rate_hz;
  spec.kind = SpectrogramKind::kLogStft;
  spec.data.resize(static_cast<size_t>(frames) * opts.out_bins);

  const std::vector<double> window = hann_window(win);
  std::vector<double> re(win), im(win);
  for (int64_t s = 0; s < frames; ++s) {
    const int64_t off = s * hop;
    for (int i = 0; i < win; ++i) {
      re[i] = static_cast<double>(wav.samples[static_cast<size_t>(off + i)]) * window[i];
      im[i] = 0.0;
    }
    fft_radix2(&re, &im, false);
    float *row = spec.row(static_cast<int>(s));
    for (int b = 0; b < opts.out_bins; ++b) {
      const double power = re[b] * re[b] + im[b] * im[b];
      row[b] = static_cast<float>(std::log(power + kLogEps));
    }
  }
  return spec;
}

std::vector<float> mel_filterbank(int n_mels, int n_fft_bins, int sample_rate_hz) {
  if (n_mels < 2) throw ValidationError("n_mels must be >= 2");
  if (n_mels > n_fft_bins) throw ValidationError("filterbank overdetermined");
  if (sample_rate_hz <= 0) throw ValidationError("invalid sample rate");

  const double nyquist = sample_rate_hz / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  // n_mels + 2 equally spaced mel points from 0 Hz to Nyquist.
  std::vector<double> hz_points(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    hz_points[i] = mel_to_hz(mel_max * i / (n_mels + 1));

  // Bin k covers frequency k * nyquist / (n_fft_bins - 1).
  const double hz_per_bin = nyquist / (n_fft_bins - 1);

  std::vector<float> fb(static_cast<size_t>(n_mels) * n_fft_bins, 0.0f);
  for (int m = 0; m < n_mels; ++m) {
    const double f_lo = hz_points[m], f_c = hz_points[m + 1], f_hi = hz_points[m + 2];
    float *row = fb.data() + static_cast<size_t>(m) * n_fft_bins;
    double row_sum = 0.0;
    for (int k = 0; k < n_fft_bins; ++k) {
      const double f = k * hz_per_bin;
      double w = 0.0;
      if (f > f_lo && f < f_c) {
        w = (f - f_lo) / (f_c - f_lo);
      } else if (f >= f_c && f < f_hi) {
        w = (f_hi - f) / (f_hi - f_c);
      }
      row[k] = static_cast<float>(w);
      row_sum += w;
    }
    if (row_sum <= 0.0) {
      // Triangle narrower than one bin: claim the nearest bin outright.
      int k = static_cast<int>(llround(f_c / hz_per_bin));
      k = std::clamp(k, 0, n_fft_bins - 1);
      row[k] = 1.0f;
    }
  }
  return fb;
}

Spectrogram log_mel(const Waveform &wav, int n_mels, double window_ms, double hop_ms) {
  if (wav.sample_rate_hz <= 0) throw ValidationError("invalid sample rate");
  const int win = window_samples(window_ms, wav.sample_rate_hz);
  const int hop = hop_samples(hop_ms, wav.sample_rate_hz);
  const int full_bins = win / 2 + 1;
  const std::vector<float> fb = mel_filterbank(n_mels, full_bins, wav.sample_rate_hz);

  const int64_t frames = num_frames(static_cast<int64_t>(wav.samples.size()), win, hop);

  Spectrogram spec;
  spec.num_frames = static_cast<int>(frames);
  spec.num_bins = n_mels;
  spec.hop_seconds = static_cast<double>(hop) / wav.sample_rate_hz;
  spec.kind = SpectrogramKind::kLogMel;
  spec.data.resize(static_cast<size_t>(frames) * n_mels);

  const std::vector<double> window = hann_window(win);
  std::vector<double> re(win), im(win), power(full_bins);
  for (int64_t s = 0; s < frames; ++s) {
    const int64_t off = s * hop;
    for (int i = 0; i < win; ++i) {
      re[i] = static_cast<double>(wav.samples[static_cast<size_t>(off + i)]) * window[i];
      im[i] = 0.0;
    }
    fft_radix2(&re, &im, false);
    for (int b = 0; b < full_bins; ++b) power[b] = re[b] * re[b] + im[b] * im[b];

    float *row = spec.row(static_cast<int>(s));
    for (int m = 0; m < n_mels; ++m) {
      const float *w = fb.data() + static_cast<size_t>(m) * full_bins;
      double acc = 0.0;
      for (int b = 0; b < full_bins; ++b) acc += w[b] * power[b];
      row[m] = static_cast<float>(std::log(acc + kLogEps));
    }
  }
  return spec;
}

std::vector<VadSegment> vad_energy(const Waveform &wav, const VadOptions &opts) {
  if (wav.samples.empty()) throw ValidationError("empty waveform");
  const int frame_len = std::max(1, static_cast<int>(llround(opts.frame_ms * 1e-3 * wav.sample_rate_hz)));
  const int64_t n = static_cast<int64_t>(wav.samples.size());
  const int64_t n_frames = (n + frame_len - 1) / frame_len;

  // RMS level per non-overlapping frame, in dB.
  std::vector<double> db(static_cast<size_t>(n_frames));
  double max_db = -1e30;
  for (int64_t f = 0; f < n_frames; ++f) {
    const int64_t lo = f * frame_len;
    const int64_t hi = std::min<int64_t>(n, lo + frame_len);
    double acc = 0.0;
    for (int64_t i = lo; i < hi; ++i)
      acc += static_cast<double>(wav.samples[static_cast<size_t>(i)]) *
             static_cast<double>(wav.samples[static_cast<size_t>(i)]);
    const double rms = std::sqrt(acc / static_cast<double>(hi - lo));
    db[static_cast<size_t>(f)] = rms > 0.0 ? 20.0 * std::log10(rms) : -1e30;
    max_db = std::max(max_db, db[static_cast<size_t>(f)]);
  }

  // Active runs in frame indices [begin, end).
  struct Run { int64_t begin, end; };
  std::vector<Run> runs;
  const double threshold = max_db - opts.rel_threshold_db;
  for (int64_t f = 0; f < n_frames; ++f) {
    // A zero-energy frame is never active, so digital silence yields no runs.
    const bool active = db[static_cast<size_t>(f)] > -1e29 &&
                        db[static_cast<size_t>(f)] > threshold;
    if (active && !runs.empty() && runs.back().end == f) {
      runs.back().end = f + 1;
    } else if (active) {
      runs.push_back({f, f + 1});
    }
  }

  const double spf = static_cast<double>(frame_len) / wav.sample_rate_hz;
  const double clip_end = static_cast<double>(n) / wav.sample_rate_hz;

  // Merge runs separated by less than merge_gap_s, then drop short ones.
  std::vector<Run> merged;
  for (const Run &r : runs) {
    if (!merged.empty() &&
        (static_cast<double>(r.begin) - static_cast<double>(merged.back().end)) * spf < opts.merge_gap_s) {
      merged.back().end = r.end;
    } else {
      merged.push_back(r);
    }
  }

  std::vector<VadSegment> segs;
  for (const Run &r : merged) {
    const double start = static_cast<double>(r.begin) * spf;
    const double end = std::min(clip_end, static_cast<double>(r.end) * spf);
    if (end - start >= opts.min_segment_s) segs.push_back({start, end});
  }
  return segs;
}

Waveform read_wav(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open wav file: " + path);

  char riff[4], wave[4];
  bin::read_bytes(is, riff, 4, "wav riff tag");
  uint32_t riff_size = bin::read_u32(is, "wav riff size");
  (void)riff_size;
  bin::read_bytes(is, wave, 4, "wav wave tag");
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
    throw ValidationError("not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;

  Waveform wav;
  while (is) {
    char tag[4];
    is.read(tag, 4);
    if (!is) break;
    uint32_t chunk_size = bin::read_u32(is, "wav chunk size");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      std::vector<char> body(chunk_size);
      bin::read_bytes(is, body.data(), chunk_size, "wav fmt chunk");
      if (chunk_size < 16) throw ValidationError("short fmt chunk: " + path);
      std::memcpy(&format, body.data() + 0, 2);
      std::memcpy(&channels, body.data() + 2, 2);
      std::memcpy(&sample_rate, body.data() + 4, 4);
      std::memcpy(&bits, body.data() + 14, 2);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw ValidationError("wav data before fmt: " + path);
      if (channels == 0) throw ValidationError("wav has zero channels: " + path);
      std::vector<char> body(chunk_size);
      bin::read_bytes(is, body.data(), chunk_size, "wav data chunk");
      wav.sample_rate_hz = static_cast<int>(sample_rate);
      if (format == 1 && bits == 16) {
        const size_t n_total = chunk_size / 2;
        const size_t n_frames_ = n_total / channels;
        wav.samples.resize(n_frames_);
        for (size_t i = 0; i < n_frames_; ++i) {
          int16_t v;
          std::memcpy(&v, body.data() + 2 * (i * channels), 2);
          wav.samples[i] = static_cast<float>(v) / 32768.0f;
        }
      } else if (format == 3 && bits == 32) {
        const size_t n_total = chunk_size / 4;
        const size_t n_frames_ = n_total / channels;
        wav.samples.resize(n_frames_);
        for (size_t i = 0; i < n_frames_; ++i) {
          float v;
          std::memcpy(&v, body.data() + 4 * (i * channels), 4);
          wav.samples[i] = v;
        }
      } else {
        throw ValidationError("unsupported wav encoding (want 16-bit PCM or 32-bit float): " + path);
      }
      return wav;
    } else {
      // Skip unknown chunk (word-aligned).
      is.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  throw ValidationError("wav file has no data chunk: " + path);
}

void write_wav(const std::string &path, const Waveform &wav) {
  if (wav.sample_rate_hz <= 0) throw ValidationError("invalid sample rate");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeError("cannot write wav file: " + path);

  const uint32_t data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
  bin::write_bytes(os, "RIFF", 4);
  bin::write_u32(os, 36 + data_bytes);
  bin::write_bytes(os, "WAVE", 4);
  bin::write_bytes(os, "fmt ", 4);
  bin::write_u32(os, 16);
  const uint16_t fmt_tag = 1, channels = 1, bits = 16;
  const uint32_t rate = static_cast<uint32_t>(wav.sample_rate_hz);
  const uint32_t byte_rate = rate * 2;
  const uint16_t block_align = 2;
  bin::write_bytes(os, &fmt_tag, 2);
  bin::write_bytes(os, &channels, 2);
  bin::write_u32(os, rate);
  bin::write_u32(os, byte_rate);
  bin::write_bytes(os, &block_align, 2);
  bin::write_bytes(os, &bits, 2);
  bin::write_bytes(os, "data", 4);
  bin::write_u32(os, data_bytes);
  for (float s : wav.samples) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    const int16_t v = static_cast<int16_t>(std::lrint(c * 32767.0f));
    bin::write_bytes(os, &v, 2);
  }
  if (!os) throw RuntimeError("short write: " + path);
}

void write_spectrogram_block(std::ostream &os, const Spectrogram &spec) {
  bin::write_bytes(os, "SPEC", 4);
  bin::write_u32(os, 1);  // version
  bin::write_u32(os, static_cast<uint32_t>(spec.num_frames));
  bin::write_u32(os, static_cast<uint32_t>(spec.num_bins));
  bin::write_f32_array(os, spec.data.data(), spec.data.size());
}

Spectrogram read_spectrogram_block(std::istream &is) {
  char magic[4];
  bin::read_bytes(is, magic, 4, "spectrogram magic");
  if (std::memcmp(magic, "SPEC", 4) != 0) throw ValidationError("bad spectrogram magic");
  const uint32_t version = bin::read_u32(is, "spectrogram version");
  if (version != 1) throw ValidationError("unsupported spectrogram version");
  Spectrogram spec;
  spec.num_frames = static_cast<int>(bin::read_u32(is, "spectrogram S"));
  spec.num_bins = static_cast<int>(bin::read_u32(is, "spectrogram F"));
  spec.data.resize(static_cast<size_t>(spec.num_frames) * spec.num_bins);
  bin::read_f32_array(is, spec.data.data(), spec.data.size(), "spectrogram data");
  return spec;
}

void save_spectrogram(const std::string &path, const Spectrogram &spec) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeError("cannot write spectrogram file: " + path);
  write_spectrogram_block(os, spec);
  if (!os) throw RuntimeError("short write: " + path);
}

Spectrogram load_spectrogram(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open spectrogram file: " + path);
  return read_spectrogram_block(is);
}

}  // namespace depa
