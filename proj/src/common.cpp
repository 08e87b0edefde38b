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

#include "depa/common.hpp"

#include <istream>
#include <ostream>

namespace depa {
namespace bin {

// All scalars are little-endian on disk.  The in-memory byte order is
// little-endian on every target we build for; memcpy keeps the code
// alias-safe.

void write_u32(std::ostream &os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char *>(b), 4);
}

void write_f32(std::ostream &os, float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  write_u32(os, u);
}

void write_bytes(std::ostream &os, const void *p, size_t n) {
  os.write(static_cast<const char *>(p), static_cast<std::streamsize>(n));
}

void write_string(std::ostream &os, const std::string &s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  write_bytes(os, s.data(), s.size());
}

void write_f32_array(std::ostream &os, const float *p, size_t n) {
  // Host is little-endian; a bulk write keeps large checkpoints fast.
  os.write(reinterpret_cast<const char *>(p), static_cast<std::streamsize>(n * 4));
}

uint32_t read_u32(std::istream &is, const char *what) {
  unsigned char b[4];
  is.read(reinterpret_cast<char *>(b), 4);
  if (!is) throw ValidationError(std::string("truncated file while reading ") + what);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

float read_f32(std::istream &is, const char *what) {
  uint32_t u = read_u32(is, what);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

void read_bytes(std::istream &is, void *p, size_t n, const char *what) {
  is.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
  if (!is) throw ValidationError(std::string("truncated file while reading ") + what);
}

std::string read_string(std::istream &is, const char *what) {
  uint32_t n = read_u32(is, what);
  if (n > (1u << 20)) throw ValidationError(std::string("implausible string length in ") + what);
  std::string s(n, '\0');
  if (n > 0) read_bytes(is, s.data(), n, what);
  return s;
}

void read_f32_array(std::istream &is, float *p, size_t n, const char *what) {
  is.read(reinterpret_cast<char *>(p), static_cast<std::streamsize>(n * 4));
  if (!is) throw ValidationError(std::string("truncated file while reading ") + what);
}

}  // namespace bin
}  // namespace depa
