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

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "depa/common.hpp"
#include "depa/dsp.hpp"
#include "oracles.hpp"

using namespace depa;

namespace {

constexpr double kPi = 3.14159265358979323846;

Waveform sine(double freq_hz, double seconds, int rate, double amp = 0.5) {
  Waveform w;
  w.sample_rate_hz = rate;
  const int n = static_cast<int>(seconds * rate);
  w.samples.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w.samples[static_cast<size_t>(i)] =
        static_cast<float>(amp * std::sin(2.0 * kPi * freq_hz * i / rate));
  return w;
}

// Dominant frequency via a zero-padded FFT of the whole clip.
double fft_peak_hz(const Waveform &w) {
  size_t n = 1;
  while (n < w.samples.size()) n <<= 1;
  std::vector<double> re(n, 0.0), im(n, 0.0);
  for (size_t i = 0; i < w.samples.size(); ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (w.samples.size() - 1));
    re[i] = w.samples[i] * hann;
  }
  fft_radix2(&re, &im, false);
  size_t best = 1;
  double best_mag = 0.0;
  for (size_t k = 1; k < n / 2; ++k) {
    const double mag = re[k] * re[k] + im[k] * im[k];
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  return static_cast<double>(best) * w.sample_rate_hz / static_cast<double>(n);
}

std::string temp_path(const char *name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE_BEGIN("dsp");

TEST_CASE("resample is the identity at the target rate") {
  Waveform w = sine(440.0, 0.25, 22050);
  Waveform out = resample(w, 22050);
  CHECK(out.sample_rate_hz == 22050);
  CHECK(out.samples == w.samples);
}

TEST_CASE("resample keeps a 440 Hz tone at 440 Hz") {
  Waveform w = sine(440.0, 1.0, 44100);
  Waveform out = resample(w, 22050);
  const double bin_hz = 22050.0 / 32768.0;
  CHECK(std::abs(fft_peak_hz(out) - 440.0) <= bin_hz + 1e-9);
}

TEST_CASE("resample preserves duration within one sample") {
  Waveform w = sine(100.0, 2.0, 44100);
  REQUIRE(w.samples.size() == 88200);
  Waveform out = resample(w, 22050);
  CHECK(std::abs(static_cast<int64_t>(out.samples.size()) - 44100) <= 1);
}

TEST_CASE("resample upsamples without moving the tone") {
  Waveform w = sine(440.0, 1.0, 8000);
  Waveform out = resample(w, 22050);
  CHECK(out.sample_rate_hz == 22050);
  const double bin_hz = 22050.0 / 32768.0;
  CHECK(std::abs(fft_peak_hz(out) - 440.0) <= bin_hz + 1e-9);
}

TEST_CASE("resample rejects an empty waveform") {
  Waveform w;
  w.sample_rate_hz = 44100;
  CHECK_THROWS_WITH_AS(resample(w, 22050), "empty waveform", ValidationError);
}

TEST_CASE("window and hop snap to 2048/512 samples at 22050 Hz") {
  CHECK(window_samples(93.0, 22050) == 2048);
  CHECK(hop_samples(23.0, 22050) == 512);
}

TEST_CASE("stft of silence sits exactly on the log floor") {
  Waveform w;
  w.sample_rate_hz = 22050;
  w.samples.assign(3 * 22050, 0.0f);
  Spectrogram spec = stft_log_power(w);
  REQUIRE(spec.num_bins == 512);
  REQUIRE(spec.num_frames > 0);
  const float floor_value = static_cast<float>(std::log(kLogEps));
  for (float v : spec.data) CHECK(v == floor_value);
}

TEST_CASE("stft frame count follows the no-padding formula") {
  Waveform w = sine(300.0, 1.0, 22050);
  REQUIRE(w.samples.size() == 22050);
  Spectrogram spec = stft_log_power(w);
  CHECK(spec.num_frames == 40);  // 1 + (22050 - 2048) / 512
}

TEST_CASE("stft of a 1 kHz tone peaks at the analytic bin") {
  Waveform w = sine(1000.0, 1.0, 22050);
  Spectrogram spec = stft_log_power(w);
  const int expected = static_cast<int>(std::lround(1000.0 * 2048 / 22050.0));
  for (int s = 0; s < spec.num_frames; ++s) {
    const float *row = spec.row(s);
    int argmax = 0;
    for (int b = 1; b < spec.num_bins; ++b)
      if (row[b] > row[argmax]) argmax = b;
    CHECK(std::abs(argmax - expected) <= 1);
  }
}

TEST_CASE("waveform shorter than one window yields a zero-frame spectrogram") {
  Waveform w = sine(300.0, 0.05, 22050);  // ~1100 samples < 2048
  Spectrogram spec = stft_log_power(w);
  CHECK(spec.num_frames == 0);
  CHECK(spec.num_bins == 512);
  CHECK(spec.data.empty());
}

TEST_CASE("frame-count formula matches the brute-force enumerator") {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const int64_t n = rng.uniform_int(0, 100000);
    const int win = static_cast<int>(rng.uniform_int(1, 5000));
    const int hop = static_cast<int>(rng.uniform_int(1, 2000));
    CHECK(num_frames(n, win, hop) == oracles::brute_force_frame_count(n, win, hop));
  }
}

TEST_CASE("spectrogram entries are finite and at least the log floor") {
  Rng rng(99);
  Waveform w;
  w.sample_rate_hz = 22050;
  w.samples.resize(22050);
  for (float &s : w.samples) s = static_cast<float>(rng.uniform(-1.0, 1.0));
  const float floor_value = static_cast<float>(std::log(kLogEps));
  for (const Spectrogram &spec : {stft_log_power(w), log_mel(w, 64)}) {
    for (float v : spec.data) {
      CHECK(std::isfinite(v));
      CHECK(v >= floor_value);
    }
  }
}

TEST_CASE("framing is deterministic") {
  Waveform w = sine(432.0, 0.7, 22050, 0.3);
  Spectrogram a = stft_log_power(w);
  Spectrogram b = stft_log_power(w);
  CHECK(a.data == b.data);
}

TEST_CASE("mel filterbank shape and weight contracts") {
  const int n_mels = 128, bins = 1025;
  std::vector<float> fb = mel_filterbank(n_mels, bins, 22050);
  REQUIRE(fb.size() == static_cast<size_t>(n_mels) * bins);
  for (int m = 0; m < n_mels; ++m) {
    double row_sum = 0.0;
    for (int b = 0; b < bins; ++b) {
      const float w = fb[static_cast<size_t>(m) * bins + b];
      CHECK(w >= 0.0f);
      CHECK(w <= 1.0f);
      row_sum += w;
    }
    CHECK(row_sum > 0.0);
  }
}

TEST_CASE("mel filter centroids increase strictly") {
  const int n_mels = 64, bins = 1025;
  std::vector<float> fb = mel_filterbank(n_mels, bins, 22050);
  double prev = -1.0;
  for (int m = 0; m < n_mels; ++m) {
    double wsum = 0.0, fsum = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double w = fb[static_cast<size_t>(m) * bins + b];
      wsum += w;
      fsum += w * b;
    }
    const double centroid = fsum / wsum;
    CHECK(centroid > prev);
    prev = centroid;
  }
}

TEST_CASE("mel filterbank covers every bin between the outermost filter peaks") {
  const int n_mels = 128, bins = 1025;
  std::vector<float> fb = mel_filterbank(n_mels, bins, 22050);
  auto row_argmax = [&](int m) {
    int best = 0;
    for (int b = 0; b < bins; ++b)
      if (fb[static_cast<size_t>(m) * bins + b] > fb[static_cast<size_t>(m) * bins + best])
        best = b;
    return best;
  };
  const int first_center = row_argmax(0);
  const int last_center = row_argmax(n_mels - 1);
  for (int b = first_center; b <= last_center; ++b) {
    float best = 0.0f;
    for (int m = 0; m < n_mels; ++m)
      best = std::max(best, fb[static_cast<size_t>(m) * bins + b]);
    CHECK(best > 0.0f);
  }
}

TEST_CASE("mel filterbank rejects more filters than bins") {
  CHECK_THROWS_WITH_AS(mel_filterbank(64, 63, 22050), "filterbank overdetermined",
                       ValidationError);
}

TEST_CASE("log-mel silence floor and shared framing") {
  Waveform silence;
  silence.sample_rate_hz = 22050;
  silence.samples.assign(22050, 0.0f);
  Spectrogram mel = log_mel(silence, 128);
  REQUIRE(mel.num_bins == 128);
  const float floor_value = static_cast<float>(std::log(kLogEps));
  for (float v : mel.data) CHECK(v == doctest::Approx(floor_value).epsilon(1e-6));

  Waveform tone = sine(500.0, 0.8, 22050);
  CHECK(log_mel(tone, 128).num_frames == stft_log_power(tone).num_frames);
}

TEST_CASE("log-mel of white noise clears the silence floor everywhere") {
  Rng rng(7);
  Waveform w;
  w.sample_rate_hz = 22050;
  w.samples.resize(22050);
  for (float &s : w.samples) s = static_cast<float>(0.3 * rng.normal());
  Spectrogram mel = log_mel(w, 128);
  const float floor_value = static_cast<float>(std::log(kLogEps));
  for (float v : mel.data) {
    CHECK(std::isfinite(v));
    CHECK(v > floor_value + 1.0f);
  }
}

TEST_CASE("vad on digital silence is empty") {
  Waveform w;
  w.sample_rate_hz = 22050;
  w.samples.assign(22050, 0.0f);
  CHECK(vad_energy(w).empty());
}

TEST_CASE("vad separates tone-silence-tone into two segments") {
  Rng rng(11);
  Waveform w;
  w.sample_rate_hz = 22050;
  const int n = 3 * 22050;
  w.samples.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    // 40 dB between tone (0.5) and noise floor (0.005).
    const bool tone = i < 22050 || i >= 2 * 22050;
    const double floor_noise = 0.005 * rng.normal() * 0.7071;
    const double v =
        tone ? 0.5 * std::sin(2.0 * kPi * 220.0 * i / 22050.0) + floor_noise : floor_noise;
    w.samples[static_cast<size_t>(i)] = static_cast<float>(v);
  }
  std::vector<VadSegment> segs = vad_energy(w);
  REQUIRE(segs.size() == 2);
  const double frame_s = 0.03;
  CHECK(std::abs(segs[0].start_seconds - 0.0) <= frame_s);
  CHECK(std::abs(segs[0].end_seconds - 1.0) <= frame_s);
  CHECK(std::abs(segs[1].start_seconds - 2.0) <= frame_s);
  CHECK(std::abs(segs[1].end_seconds - 3.0) <= frame_s);
}

TEST_CASE("vad on a constant tone spans the whole clip") {
  Waveform w = sine(220.0, 1.5, 22050);
  std::vector<VadSegment> segs = vad_energy(w);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].start_seconds == doctest::Approx(0.0));
  CHECK(segs[0].end_seconds == doctest::Approx(1.5).epsilon(0.05));
}

TEST_CASE("vad segments are sorted, disjoint, and bounded by the clip") {
  Rng rng(31);
  Waveform w;
  w.sample_rate_hz = 16000;
  const int n = 4 * 16000;
  w.samples.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 16000.0;
    const bool on = std::fmod(t, 0.9) < 0.45;
    w.samples[static_cast<size_t>(i)] = static_cast<float>(
        (on ? 0.4 * std::sin(2.0 * kPi * 180.0 * t) : 0.0) + 0.003 * rng.normal());
  }
  std::vector<VadSegment> segs = vad_energy(w);
  double prev_end = 0.0, total = 0.0;
  for (const VadSegment &s : segs) {
    CHECK(s.end_seconds > s.start_seconds);
    CHECK(s.start_seconds >= prev_end);
    prev_end = s.end_seconds;
    total += s.end_seconds - s.start_seconds;
  }
  CHECK(total <= w.duration_seconds() + 1e-9);
}

TEST_CASE("spectrogram block round-trips exactly") {
  Waveform w = sine(700.0, 0.4, 22050, 0.4);
  Spectrogram spec = log_mel(w, 32);
  const std::string path = temp_path("depa_spec_roundtrip.spec");
  save_spectrogram(path, spec);
  Spectrogram back = load_spectrogram(path);
  CHECK(back.num_frames == spec.num_frames);
  CHECK(back.num_bins == spec.num_bins);
  CHECK(back.data == spec.data);
  std::remove(path.c_str());
}

TEST_CASE("spectrogram loader rejects a corrupted magic") {
  const std::string path = temp_path("depa_spec_badmagic.spec");
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOPE" << std::string(12, '\0');
  }
  CHECK_THROWS_AS(load_spectrogram(path), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("wav writer/reader round-trip within 16-bit quantization") {
  Waveform w = sine(350.0, 0.2, 22050, 0.8);
  const std::string path = temp_path("depa_wav_roundtrip.wav");
  write_wav(path, w);
  Waveform back = read_wav(path);
  REQUIRE(back.sample_rate_hz == 22050);
  REQUIRE(back.samples.size() == w.samples.size());
  for (size_t i = 0; i < w.samples.size(); ++i)
    CHECK(std::abs(back.samples[i] - w.samples[i]) <= 1.0f / 32767.0f);
  std::remove(path.c_str());
}

TEST_CASE("wav reader handles 32-bit float and takes the first channel") {
  const std::string path = temp_path("depa_wav_float32.wav");
  {
    std::ofstream os(path, std::ios::binary);
    auto u32 = [&](uint32_t v) { bin::write_u32(os, v); };
    auto u16 = [&](uint16_t v) { bin::write_bytes(os, &v, 2); };
    const uint32_t frames = 100, channels = 2, rate = 8000;
    const uint32_t data_bytes = frames * channels * 4;
    bin::write_bytes(os, "RIFF", 4);
    u32(36 + data_bytes);
    bin::write_bytes(os, "WAVE", 4);
    bin::write_bytes(os, "fmt ", 4);
    u32(16);
    u16(3);  // IEEE float
    u16(static_cast<uint16_t>(channels));
    u32(rate);
    u32(rate * channels * 4);
    u16(static_cast<uint16_t>(channels * 4));
    u16(32);
    bin::write_bytes(os, "data", 4);
    u32(data_bytes);
    for (uint32_t i = 0; i < frames; ++i) {
      bin::write_f32(os, static_cast<float>(i) / frames);  // channel 0
      bin::write_f32(os, -1.0f);                           // channel 1
    }
  }
  Waveform w = read_wav(path);
  REQUIRE(w.sample_rate_hz == 8000);
  REQUIRE(w.samples.size() == 100);
  CHECK(w.samples[50] == doctest::Approx(0.5).epsilon(1e-6));
  std::remove(path.c_str());
}

TEST_SUITE_END();
