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

#ifndef DEPA_METRICS_HPP_
#define DEPA_METRICS_HPP_

#include <string>
#include <vector>

namespace depa {

struct ClassificationReport {
  // Index 0 = class 0, index 1 = class 1.
  double precision[2] = {0.0, 0.0};
  double recall[2] = {0.0, 0.0};
  double f1[2] = {0.0, 0.0};
  // Unweighted means over the two classes.
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

struct RegressionReport {
  double mae = 0.0;
  double rmse = 0.0;
};

// Per-class precision/recall/F1 with zero-denominator cases defined as 0;
// macro values average over both classes even when one is absent.
ClassificationReport classification_report(const std::vector<int> &pred,
                                           const std::vector<int> &truth);

RegressionReport regression_report(const std::vector<double> &pred,
                                   const std::vector<double> &truth);

// key=value text block.
std::string format_reports(const ClassificationReport &c, const RegressionReport &r);
// Machine-readable: one "metric,value" row per line.
std::string format_reports_csv(const ClassificationReport &c, const RegressionReport &r);

}  // namespace depa

#endif  // DEPA_METRICS_HPP_
