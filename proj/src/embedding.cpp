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

#include "depa/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace depa {

DepaVector extract_depa(EncoderRuntime *encoder, const ResponseSegment &seg) {
  const Spectrogram &spec = seg.spectrogram;
  if (spec.num_bins != encoder->in_bins())
    throw ValidationError("feature dimension mismatch: response has " +
                          std::to_string(spec.num_bins) + " bins, encoder expects " +
                          std::to_string(encoder->in_bins()));
  if (spec.num_frames < 1)
    throw ValidationError("empty response segment: " + seg.clip_id);

  const int min_frames = encoder->min_frames();
  if (spec.num_frames >= min_frames)
    return encoder->forward(spec.data.data(), spec.num_frames, spec.num_bins);

  // Symmetric zero padding up to the encoder minimum; one-word responses
  // are legal inputs.
  const int pad = min_frames - spec.num_frames;
  const int top = pad / 2;
  std::vector<float> padded(static_cast<size_t>(min_frames) * spec.num_bins, 0.0f);
  std::copy(spec.data.begin(), spec.data.end(),
            padded.begin() + static_cast<size_t>(top) * spec.num_bins);
  return encoder->forward(padded.data(), min_frames, spec.num_bins);
}

std::vector<DepaVector> extract_depa_sequence(EncoderRuntime *encoder,
                                              const std::vector<ResponseSegment> &segs) {
  if (segs.empty()) throw ValidationError("empty response list");
  std::vector<DepaVector> out;
  out.reserve(segs.size());
  for (const ResponseSegment &seg : segs) out.push_back(extract_depa(encoder, seg));
  return out;
}

namespace {

// Pool one cleaned (finite-only) column into its seven statistics.
void pool_column(const std::vector<double> &col, double *stats) {
  const size_t n = col.size();
  if (n == 0) {
    // All cells invalid: degenerate constant-column output with value 0.
    for (int i = 0; i < 7; ++i) stats[i] = 0.0;
    return;
  }
  double sum = 0.0, mn = col[0], mx = col[0];
  for (double v : col) {
    sum += v;
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  const double mean = sum / static_cast<double>(n);

  std::vector<double> sorted(col);
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[(n - 1) / 2];  // lower middle for even n

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : col) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);

  double skew = 0.0, kurt = 0.0;
  if (m2 >= 1e-12) {
    skew = m3 / std::pow(m2, 1.5);
    kurt = m4 / (m2 * m2) - 3.0;
  }
  stats[0] = mean;
  stats[1] = median;
  stats[2] = m2;
  stats[3] = mn;
  stats[4] = mx;
  stats[5] = skew;
  stats[6] = kurt;
}

}  // namespace

std::vector<float> higher_order_stats(const FrameFeatureMatrix &m) {
  if (m.rows < 1) throw ValidationError("higher_order_stats: empty matrix");
  const int d = m.cols;
  std::vector<float> out(static_cast<size_t>(7) * d);
  std::vector<double> col;
  double stats[7];
  for (int c = 0; c < d; ++c) {
    col.clear();
    for (int r = 0; r < m.rows; ++r) {
      const float v = m.at(r, c);
      if (std::isfinite(v)) col.push_back(static_cast<double>(v));
    }
    pool_column(col, stats);
    // Stat-major layout: all means, then all medians, and so on.
    for (int s = 0; s < 7; ++s)
      out[static_cast<size_t>(s) * d + c] = static_cast<float>(stats[s]);
  }
  return out;
}

FrameFeatureMatrix read_feature_csv(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open feature csv: " + path);
  FrameFeatureMatrix m;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    int cols = 0;
    while (std::getline(row, cell, ',')) {
      try {
        // "nan"/"inf" cells are legal and handled by the pooling cleanup.
        m.data.push_back(std::stof(cell));
      } catch (const std::exception &) {
        throw ValidationError(path + ":" + std::to_string(line_no) +
                              ": cannot parse feature value '" + cell + "'");
      }
      ++cols;
    }
    if (m.rows == 0) {
      m.cols = cols;
    } else if (cols != m.cols) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(m.cols) + " columns, found " + std::to_string(cols));
    }
    ++m.rows;
  }
  if (m.rows == 0) throw ValidationError("feature csv has no rows: " + path);
  return m;
}

void save_embeddings(const std::string &path, const std::vector<DepaVector> &vectors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeError("cannot write embeddings: " + path);
  for (size_t i = 0; i < vectors.size(); ++i) {
    bin::write_u32(os, static_cast<uint32_t>(i));
    bin::write_u32(os, static_cast<uint32_t>(vectors[i].size()));
    bin::write_f32_array(os, vectors[i].data(), vectors[i].size());
  }
  if (!os) throw RuntimeError("short write: " + path);
}

std::vector<DepaVector> load_embeddings(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open embeddings: " + path);
  std::vector<DepaVector> out;
  while (is.peek() != std::char_traits<char>::eof()) {
    const uint32_t index = bin::read_u32(is, "embedding index");
    if (index != out.size()) throw ValidationError("embedding file out of order: " + path);
    const uint32_t dim = bin::read_u32(is, "embedding dim");
    DepaVector v(dim);
    bin::read_f32_array(is, v.data(), dim, "embedding values");
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace depa
