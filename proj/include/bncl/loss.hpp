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

#ifndef BNCL_LOSS_HPP_
#define BNCL_LOSS_HPP_

#include <bncl/matrix.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace bncl {

inline constexpr double kLogClampEpsilon = 1e-7;
inline constexpr double kSurrogateExponentLimit = 500.0;

struct LossConfig {
  double alpha2 = 0.1;
  double alpha3 = 0.5;
  double alpha4 = 100.0;
  double sharpness = 10.0;  // C
  bool disable_l2 = false;
  bool disable_l3 = false;

  void validate() const;
};

struct LossBreakdown {
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double l4 = 0.0;
  double total = 0.0;
  bool l2_active = false;
  bool l3_active = false;
  bool l4_active = false;

  LossBreakdown& operator+=(const LossBreakdown& other);
};

/// Accumulates d(loss)/dP and d(loss)/dPbar, scaled by the caller's weight.
struct LossGradient {
  Matrix<double> entailment;
  Matrix<double> contradiction;

  LossGradient() = default;
  LossGradient(std::size_t rows, std::size_t cols) : entailment(rows, cols), contradiction(rows, cols) {}
};

/// (batch row, y) pairs for the annotated samples present in a batch.
using AnnotatedRows = std::vector<std::pair<std::size_t, std::span<const unsigned char>>>;

/// Supervision targets as seen by one batch.
struct BatchTargets {
  std::optional<double> kappa;
  std::span<const double> lambdas;  // empty when not available
  AnnotatedRows annotated;
  double population = 0.0;          // sample count the frequency target scales with
};

/// Sharpened sigmoid 1 / (1 + exp(-C (p - pbar))), approximating 1[p > pbar].
double surrogate_indicator(double p, double pbar, double sharpness);

double loss_hesitancy(const Matrix<double>& P, const Matrix<double>& Pbar, LossGradient* grad = nullptr,
                      double weight = 1.0);
double loss_label_frequency(const Matrix<double>& P, const Matrix<double>& Pbar, std::span<const double> lambdas,
                            double sharpness, double population, LossGradient* grad = nullptr, double weight = 1.0);
double loss_cardinality(const Matrix<double>& P, const Matrix<double>& Pbar, double kappa, double sharpness,
                        LossGradient* grad = nullptr, double weight = 1.0);
double loss_annotated(const Matrix<double>& P, const Matrix<double>& Pbar, const AnnotatedRows& annotated,
                      LossGradient* grad = nullptr, double weight = 1.0);

/// Weighted sum L1 + a2 L2 + a3 L3 + a4 L4. A component is active when its
/// target is present and it is not disabled; inactive components are 0.
LossBreakdown total_loss(const Matrix<double>& P, const Matrix<double>& Pbar, const LossConfig& config,
                         const BatchTargets& targets, LossGradient* grad = nullptr);

}  // namespace bncl

#endif  // BNCL_LOSS_HPP_
