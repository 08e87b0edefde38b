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

#ifndef DEPA_SYNTH_HPP_
#define DEPA_SYNTH_HPP_

#include <cstdint>
#include <string>

#include "depa/manifest.hpp"

namespace depa {

struct SynthOptions {
  int n_patients = 40;
  uint64_t seed = 0;
  int sample_rate = 22050;
  double train_fraction = 0.7;
};

// Writes <out_dir>/manifest.jsonl plus one WAV per synthetic patient under
// <out_dir>/audio/.  Half the patients (±1) are depressed; their responses
// carry a lower fundamental, lower energy, and longer pauses, with the
// fundamental and energy tied monotonically to the planted PHQ-8 score so
// the severity is recoverable from the audio.  Fully seed-deterministic.
Manifest generate_synthetic_corpus(const SynthOptions &opts, const std::string &out_dir);

}  // namespace depa

#endif  // DEPA_SYNTH_HPP_
