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

#ifndef DEPA_DSP_HPP_
#define DEPA_DSP_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace depa {

// Mono audio at a known rate.  Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate_hz = 0;

  double duration_seconds() const {
    return sample_rate_hz > 0
               ? static_cast<double>(samples.size()) / sample_rate_hz
               : 0.0;
  }
};

enum class SpectrogramKind { kLogStft, kLogMel };

// S x F matrix of natural-log power values, row per frame.
struct Spectrogram {
  int num_frames = 0;    // S
  int num_bins = 0;      // F
  double hop_seconds = 0.0;
  SpectrogramKind kind = SpectrogramKind::kLogStft;
  std::vector<float> data;  // row-major, num_frames * num_bins

  float &at(int s, int f) { return data[static_cast<size_t>(s) * num_bins + f]; }
  float at(int s, int f) const { return data[static_cast<size_t>(s) * num_bins + f]; }
  const float *row(int s) const { return data.data() + static_cast<size_t>(s) * num_bins; }
  float *row(int s) { return data.data() + static_cast<size_t>(s) * num_bins; }
};

struct VadSegment {
  double start_seconds = 0.0;
  double end_seconds = 0.0;
};

// Log floor added to power values before taking the natural log.
inline constexpr double kLogEps = 1e-10;

struct StftOptions {
  double window_ms = 93.0;
  double hop_ms = 23.0;
  int out_bins = 512;  // lowest bins kept from the n_fft/2+1 spectrum
};

struct VadOptions {
  double frame_ms = 30.0;
  double rel_threshold_db = 30.0;
  double min_segment_s = 0.2;
  double merge_gap_s = 0.3;
};

// Window/hop in samples for a given rate.  93 ms / 23 ms at 22050 Hz land on
// 2048 / 512 samples (nearest power-of-two window, hop = window / 4).
int window_samples(double window_ms, int sample_rate_hz);
int hop_samples(double hop_ms, int sample_rate_hz);

// Frame count under the no-end-padding rule:
// 1 + floor((n - win) / hop) for n >= win, else 0.
int64_t num_frames(int64_t num_samples, int win, int hop);

// Band-limited sample rate conversion (windowed-sinc, low-pass at the
// smaller Nyquist).  Identity when rates already match.
Waveform resample(const Waveform &wav, int target_rate_hz = 22050);

// Log-power STFT with a Hann window.  Keeps the lowest out_bins bins.
Spectrogram stft_log_power(const Waveform &wav, const StftOptions &opts = {});

// Triangular mel filterbank, n_mels x n_fft_bins, peak-normalized weights.
// Rows whose triangle is narrower than one FFT bin get their nearest bin set
// to 1 so that every row has positive sum.
std::vector<float> mel_filterbank(int n_mels, int n_fft_bins, int sample_rate_hz);

// Log-mel spectrogram: filterbank applied to the full power spectrum then
// ln(. + eps).  Framing identical to stft_log_power.
Spectrogram log_mel(const Waveform &wav, int n_mels = 128,
                    double window_ms = 93.0, double hop_ms = 23.0);

// Energy VAD: a frame is active iff its RMS level in dB is within
// rel_threshold_db of the loudest frame.  Active runs closer than
// merge_gap_s are merged, runs shorter than min_segment_s dropped.
std::vector<VadSegment> vad_energy(const Waveform &wav, const VadOptions &opts = {});

// WAV file I/O.  Reader accepts 16-bit PCM and 32-bit float, takes the first
// channel of multi-channel files.  Writer emits mono 16-bit PCM.
Waveform read_wav(const std::string &path);
void write_wav(const std::string &path, const Waveform &wav);

// Flat binary spectrogram block: 16-byte header (magic "SPEC", version u32,
// S u32, F u32) followed by row-major little-endian float32.
void write_spectrogram_block(std::ostream &os, const Spectrogram &spec);
Spectrogram read_spectrogram_block(std::istream &is);
void save_spectrogram(const std::string &path, const Spectrogram &spec);
Spectrogram load_spectrogram(const std::string &path);

// In-place iterative radix-2 FFT over interleaved complex doubles.
// n must be a power of two.
void fft_radix2(std::vector<double> *re, std::vector<double> *im, bool inverse);

}  // namespace depa

#endif  // DEPA_DSP_HPP_
