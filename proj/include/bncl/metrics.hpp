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

#ifndef BNCL_METRICS_HPP_
#define BNCL_METRICS_HPP_

#include <bncl/kernels.hpp>
#include <bncl/matrix.hpp>

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace bncl {

struct MetricsReport {
  double acc = 0.0;   // subset accuracy
  double ha = 0.0;    // hamming accuracy
  double ebf1 = 0.0;  // example-based F1
  double mif1 = 0.0;  // micro-averaged F1
  double maf1 = 0.0;  // macro-averaged F1, 0/0 per label counts as 0
  std::size_t samples = 0;
  ConfusionCounts confusion;
};

ConfusionCounts confusion_per_label(const BinaryMatrix& truth, const BinaryMatrix& pred);

/// Requires equal shapes, at least one sample, and a positive in every truth row.
MetricsReport compute_all(const BinaryMatrix& truth, const BinaryMatrix& pred);

nlohmann::json to_json(const MetricsReport& report, bool with_confusion = false);

/// Aligned text table, one row per named report.
std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace bncl

#endif  // BNCL_METRICS_HPP_
