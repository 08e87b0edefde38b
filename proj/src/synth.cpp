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

#include "depa/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "depa/common.hpp"
#include "depa/dsp.hpp"

namespace depa {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 6.283185307179586;

struct PatientProfile {
  bool depressed = false;
  int score = 0;          // PHQ-8
  double f0 = 0.0;        // fundamental, Hz
  double amp = 0.0;       // target speech amplitude
  int n_responses = 0;
};

// A voiced "response": a small harmonic stack with syllabic amplitude
// modulation, mild vibrato, and a noise floor.
void append_voiced(std::vector<float> *out, double seconds, double f0, double amp,
                   int sample_rate, Rng *rng) {
  const int n = static_cast<int>(seconds * sample_rate);
  const double mod_rate = rng->uniform(2.0, 5.0);
  const double mod_phase = rng->uniform(0.0, kTwoPi);
  const double vib_rate = rng->uniform(4.0, 6.5);
  const double vib_depth = 0.008;
  const double phase0 = rng->uniform(0.0, kTwoPi);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f = f0 * (1.0 + vib_depth * std::sin(kTwoPi * vib_rate * t));
    double v = 0.0;
    double h_amp = 1.0;
    for (int h = 1; h <= 4; ++h) {
      v += h_amp * std::sin(kTwoPi * f * h * t + phase0 * h);
      h_amp *= 0.55;
    }
    const double env = 0.55 + 0.45 * std::sin(kTwoPi * mod_rate * t + mod_phase);
    // Short attack/release ramps avoid clicks at the segment edges.
    const double edge = std::min({1.0, t / 0.02, (seconds - t) / 0.02});
    v = v / 2.1 * amp * env * std::max(0.0, edge);
    v += 0.004 * rng->normal();
    out->push_back(static_cast<float>(v));
  }
}

void append_silence(std::vector<float> *out, double seconds, int sample_rate, Rng *rng) {
  const int n = static_cast<int>(seconds * sample_rate);
  for (int i = 0; i < n; ++i) out->push_back(static_cast<float>(0.0008 * rng->normal()));
}

}  // namespace

Manifest generate_synthetic_corpus(const SynthOptions &opts, const std::string &out_dir) {
  if (opts.n_patients < 4) throw ValidationError("synthetic corpus needs at least 4 patients");
  fs::create_directories(fs::path(out_dir) / "audio");

  Rng rng(opts.seed);
  Rng assign_rng = rng.fork(0x41535347);

  // Exactly floor(n/2) depressed patients, order shuffled.
  std::vector<int> depressed_flags(static_cast<size_t>(opts.n_patients), 0);
  for (int i = 0; i < opts.n_patients / 2; ++i) depressed_flags[static_cast<size_t>(i)] = 1;
  assign_rng.shuffle(&depressed_flags);

  // Stratified split: the first 70% of each cohort (in patient order) train.
  int dep_total = 0, healthy_total = 0;
  for (int flag : depressed_flags) (flag ? dep_total : healthy_total) += 1;
  const int dep_train = std::max(1, static_cast<int>(dep_total * opts.train_fraction));
  const int healthy_train = std::max(1, static_cast<int>(healthy_total * opts.train_fraction));

  Manifest manifest;
  int dep_seen = 0, healthy_seen = 0;
  for (int p = 0; p < opts.n_patients; ++p) {
    Rng prng = rng.fork(0x50415400 + static_cast<uint64_t>(p));
    PatientProfile prof;
    prof.depressed = depressed_flags[static_cast<size_t>(p)] == 1;
    prof.score = static_cast<int>(prof.depressed ? prng.uniform_int(10, 24)
                                                 : prng.uniform_int(0, 9));
    const double severity = static_cast<double>(prof.score) / 24.0;
    // Fundamental and energy fall monotonically with severity; jitter keeps
    // the cohorts from being trivially separable on a single response.
    prof.f0 = 210.0 - 100.0 * severity + prng.uniform(-8.0, 8.0);
    prof.amp = 0.32 - 0.18 * severity + prng.uniform(-0.02, 0.02);
    prof.n_responses = static_cast<int>(prng.uniform_int(5, 20));

    std::vector<float> audio;
    ManifestClip clip;
    char id[32];
    std::snprintf(id, sizeof(id), "p%03d", p);
    clip.clip_id = id;
    const std::string wav_name = std::string("audio/") + id + ".wav";
    clip.audio_path = (fs::path(out_dir) / wav_name).string();

    const bool is_train = prof.depressed ? (dep_seen++ < dep_train)
                                         : (healthy_seen++ < healthy_train);
    clip.split = is_train ? "train" : "dev";
    clip.labels = ClipLabels{prof.depressed ? 1 : 0, static_cast<double>(prof.score)};

    append_silence(&audio, prng.uniform(0.2, 0.5), opts.sample_rate, &prng);
    for (int r = 0; r < prof.n_responses; ++r) {
      // Interviewer prompt: same bland tone for every patient, no signal.
      const double q_dur = prng.uniform(0.4, 0.8);
      double start = static_cast<double>(audio.size()) / opts.sample_rate;
      append_voiced(&audio, q_dur, 320.0, 0.25, opts.sample_rate, &prng);
      double end = static_cast<double>(audio.size()) / opts.sample_rate;
      clip.segments.push_back({start, end, SpeakerRole::kInterviewer});

      append_silence(&audio, prng.uniform(0.15, 0.35), opts.sample_rate, &prng);

      // Participant response with a per-response gain nuisance.
      const double dur = prng.uniform(0.5, 5.0);
      const double gain = prng.uniform(0.75, 1.35);
      start = static_cast<double>(audio.size()) / opts.sample_rate;
      append_voiced(&audio, dur, prof.f0, prof.amp * gain, opts.sample_rate, &prng);
      end = static_cast<double>(audio.size()) / opts.sample_rate;
      clip.segments.push_back({start, end, SpeakerRole::kParticipant});

      // Post-response pause, longer with severity.
      const double pause = prng.uniform(0.25, 0.7) + severity * prng.uniform(0.4, 1.2);
      append_silence(&audio, pause, opts.sample_rate, &prng);
    }

    Waveform wav;
    wav.sample_rate_hz = opts.sample_rate;
    wav.samples = std::move(audio);
    write_wav(clip.audio_path, wav);
    manifest.clips.push_back(std::move(clip));
  }

  write_manifest((fs::path(out_dir) / "manifest.jsonl").string(), manifest);
  return manifest;
}

}  // namespace depa
