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

#ifndef DEPA_COMMON_HPP_
#define DEPA_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace depa {

// Bad inputs, malformed files, configuration mistakes.  The CLI maps these
// to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string &msg) : std::runtime_error(msg) {}
};

// Failures while running a stage (I/O, numerical problems).  Exit code 3.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string &msg) : std::runtime_error(msg) {}
};

// Deterministic uniform helpers on top of a raw 64-bit generator state.
// Uses splitmix64 so that streams are identical across platforms and
// standard-library versions (std::uniform_* distributions are not
// implementation-defined-free).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Derive an independent stream, e.g. one per stage.
  Rng fork(uint64_t salt) {
    return Rng(next_u64() ^ (salt * 0x9e3779b97f4a7c15ULL));
  }

  template <typename T>
  void shuffle(std::vector<T> *v) {
    for (size_t i = v->size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_u64() % i);
      std::swap((*v)[i - 1], (*v)[j]);
    }
  }

 private:
  uint64_t state_;
};

// Little-endian binary I/O used by every on-disk format in this project.
namespace bin {

void write_u32(std::ostream &os, uint32_t v);
void write_f32(std::ostream &os, float v);
void write_bytes(std::ostream &os, const void *p, size_t n);
void write_string(std::ostream &os, const std::string &s);
void write_f32_array(std::ostream &os, const float *p, size_t n);

uint32_t read_u32(std::istream &is, const char *what);
float read_f32(std::istream &is, const char *what);
void read_bytes(std::istream &is, void *p, size_t n, const char *what);
std::string read_string(std::istream &is, const char *what);
void read_f32_array(std::istream &is, float *p, size_t n, const char *what);

}  // namespace bin

}  // namespace depa

#endif  // DEPA_COMMON_HPP_
