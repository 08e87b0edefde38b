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
//
// Independent test oracles.  Everything here is deliberately written
// against the contracts, not against the library internals: brute-force
// enumeration, explicit interval walking, long-double arithmetic.

#ifndef DEPA_TESTS_ORACLES_HPP_
#define DEPA_TESTS_ORACLES_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracles {

// Frame count by explicitly advancing a window start.
inline int64_t brute_force_frame_count(int64_t n, int win, int hop) {
  int64_t frames = 0;
  for (int64_t start = 0; start + win <= n; start += hop) ++frames;
  return frames;
}

struct SliceInterval {
  int64_t start = 0;  // first row of the sample
  int64_t end = 0;    // one past the last row (may exceed S: zero padding)
};

// Lay out [sample][gap][sample][gap]... by repeated subtraction in long
// double, promoting empty layouts to one padded sample.
inline std::vector<SliceInterval> brute_force_slice_intervals(int64_t s_frames, int k, int t,
                                                              double alpha) {
  const int64_t span = (2LL * k + 1) * t;
  const long double chunk = (1.0L + static_cast<long double>(alpha)) * span;
  int64_t n = 0;
  long double remaining = static_cast<long double>(s_frames);
  while (remaining >= chunk) {
    remaining -= chunk;
    ++n;
  }
  if (n == 0) n = 1;
  const int64_t gap = static_cast<int64_t>(
      std::floor(static_cast<long double>(alpha) * static_cast<long double>(span)));
  std::vector<SliceInterval> out;
  int64_t cursor = 0;
  for (int64_t i = 0; i < n; ++i) {
    out.push_back({cursor, cursor + span});
    cursor += span + gap;
  }
  return out;
}

struct ConfusionCounts {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline ConfusionCounts brute_force_confusion(const std::vector<int> &pred,
                                             const std::vector<int> &truth, int positive) {
  ConfusionCounts c;
  for (size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == positive;
    const bool t = truth[i] == positive;
    if (p && t) ++c.tp;
    if (p && !t) ++c.fp;
    if (!p && t) ++c.fn;
    if (!p && !t) ++c.tn;
  }
  return c;
}

inline double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// Relative error with a floored denominator: a genuine relative comparison
// for gradients of meaningful size, an absolute one below the floor.
inline double grad_rel_error(double analytic, double numeric) {
  const double den = std::max({std::abs(analytic), std::abs(numeric), 1e-2});
  return std::abs(analytic - numeric) / den;
}

}  // namespace oracles

#endif  // DEPA_TESTS_ORACLES_HPP_
