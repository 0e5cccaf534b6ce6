/**
 * Copyright 2026 The BNCL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <bncl/metrics.hpp>

#include <bncl/error.hpp>

#include <cstdio>
#include <sstream>

namespace bncl {

namespace {
void check_shapes(const BinaryMatrix& truth, const BinaryMatrix& pred) {
  if (!truth.same_shape(pred)) {
    throw ValidationError("shape mismatch: truth is " + std::to_string(truth.rows()) + "x" +
                          std::to_string(truth.cols()) + ", prediction is " + std::to_string(pred.rows()) + "x" +
                          std::to_string(pred.cols()));
  }
}
}  // namespace

ConfusionCounts confusion_per_label(const BinaryMatrix& truth, const BinaryMatrix& pred) {
  check_shapes(truth, pred);
  return kernels::confusion_counts(truth, pred);
}

MetricsReport compute_all(const BinaryMatrix& truth, const BinaryMatrix& pred) {
  check_shapes(truth, pred);
  const std::size_t M = truth.rows();
  const std::size_t L = truth.cols();
  if (M == 0) throw ValidationError("metrics need at least one sample");

  MetricsReport r;
  r.samples = M;
  std::size_t exact = 0;
  std::size_t agree = 0;
  double ebf1_sum = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    std::size_t both = 0, n_true = 0, n_pred = 0, same = 0;
    for (std::size_t l = 0; l < L; ++l) {
      const bool y = truth(i, l) != 0;
      const bool p = pred(i, l) != 0;
      both += y && p;
      n_true += y;
      n_pred += p;
      same += y == p;
    }
    if (n_true == 0) throw ValidationError("truth row " + std::to_string(i) + " has no positive label");
    exact += same == L;
    agree += same;
    ebf1_sum += 2.0 * static_cast<double>(both) / static_cast<double>(n_true + n_pred);
  }
  r.acc = static_cast<double>(exact) / static_cast<double>(M);
  r.ha = static_cast<double>(agree) / static_cast<double>(M * L);
  r.ebf1 = ebf1_sum / static_cast<double>(M);

  r.confusion = kernels::confusion_counts(truth, pred);
  std::int64_t tp = 0, fp = 0, fn = 0;
  double maf1_sum = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    tp += r.confusion.tp[l];
    fp += r.confusion.fp[l];
    fn += r.confusion.fn[l];
    const std::int64_t denom = 2 * r.confusion.tp[l] + r.confusion.fp[l] + r.confusion.fn[l];
    if (denom > 0) maf1_sum += 2.0 * static_cast<double>(r.confusion.tp[l]) / static_cast<double>(denom);
  }
  const std::int64_t denom = 2 * tp + fp + fn;
  r.mif1 = denom > 0 ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
  r.maf1 = maf1_sum / static_cast<double>(L);
  return r;
}

nlohmann::json to_json(const MetricsReport& report, bool with_confusion) {
  nlohmann::json j{{"acc", report.acc},   {"ha", report.ha},     {"ebf1", report.ebf1},
                   {"mif1", report.mif1}, {"maf1", report.maf1}, {"samples", report.samples}};
  if (with_confusion) {
    j["confusion"] = {{"tp", report.confusion.tp},
                      {"fp", report.confusion.fp},
                      {"fn", report.confusion.fn},
                      {"tn", report.confusion.tn}};
  }
  return j;
}

std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::size_t width = 6;
  for (const auto& [name, _] : rows) width = std::max(width, name.size());
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s  %8s  %8s  %8s  %8s  %8s\n", static_cast<int>(width), "method", "ACC", "HA",
                "ebF1", "miF1", "maF1");
  out << buf;
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %8.4f  %8.4f  %8.4f  %8.4f  %8.4f\n", static_cast<int>(width), name.c_str(),
                  r.acc, r.ha, r.ebf1, r.mif1, r.maf1);
    out << buf;
  }
  return out.str();
}

}  // namespace bncl
