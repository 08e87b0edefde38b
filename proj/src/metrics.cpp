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

#include "depa/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "depa/common.hpp"

namespace depa {

ClassificationReport classification_report(const std::vector<int> &pred,
                                           const std::vector<int> &truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw ValidationError("classification_report: need equal non-empty prediction/truth lists");

  ClassificationReport rep;
  for (int c = 0; c <= 1; ++c) {
    int64_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i] == c, t = truth[i] == c;
      if (p && t) ++tp;
      if (p && !t) ++fp;
      if (!p && t) ++fn;
    }
    const double prec = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double rec = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f1 = (prec + rec) > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    rep.precision[c] = prec;
    rep.recall[c] = rec;
    rep.f1[c] = f1;
  }
  rep.macro_precision = 0.5 * (rep.precision[0] + rep.precision[1]);
  rep.macro_recall = 0.5 * (rep.recall[0] + rep.recall[1]);
  rep.macro_f1 = 0.5 * (rep.f1[0] + rep.f1[1]);
  return rep;
}

RegressionReport regression_report(const std::vector<double> &pred,
                                   const std::vector<double> &truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw ValidationError("regression_report: need equal non-empty prediction/truth lists");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  RegressionReport rep;
  rep.mae = abs_sum / static_cast<double>(pred.size());
  rep.rmse = std::sqrt(sq_sum / static_cast<double>(pred.size()));
  return rep;
}

std::string format_reports(const ClassificationReport &c, const RegressionReport &r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "macro_precision=%.6f\n"
                "macro_recall=%.6f\n"
                "macro_f1=%.6f\n"
                "precision_0=%.6f\nrecall_0=%.6f\nf1_0=%.6f\n"
                "precision_1=%.6f\nrecall_1=%.6f\nf1_1=%.6f\n"
                "mae=%.6f\nrmse=%.6f\n",
                c.macro_precision, c.macro_recall, c.macro_f1, c.precision[0], c.recall[0],
                c.f1[0], c.precision[1], c.recall[1], c.f1[1], r.mae, r.rmse);
  return buf;
}

std::string format_reports_csv(const ClassificationReport &c, const RegressionReport &r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "metric,value\n"
                "macro_precision,%.6f\nmacro_recall,%.6f\nmacro_f1,%.6f\n"
                "precision_0,%.6f\nrecall_0,%.6f\nf1_0,%.6f\n"
                "precision_1,%.6f\nrecall_1,%.6f\nf1_1,%.6f\n"
                "mae,%.6f\nrmse,%.6f\n",
                c.macro_precision, c.macro_recall, c.macro_f1, c.precision[0], c.recall[0],
                c.f1[0], c.precision[1], c.recall[1], c.f1[1], r.mae, r.rmse);
  return buf;
}

}  // namespace depa
