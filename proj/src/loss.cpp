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

#include <bncl/loss.hpp>

#include <bncl/error.hpp>

#include <algorithm>
#include <cmath>

namespace bncl {

void LossConfig::validate() const {
  if (!(sharpness > 1.0)) throw ValidationError("sharpness C must be > 1");
  for (double a : {alpha2, alpha3, alpha4}) {
    if (!std::isfinite(a) || a < 0.0) throw ValidationError("loss weights must be finite and nonnegative");
  }
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  l1 += o.l1;
  l2 += o.l2;
  l3 += o.l3;
  l4 += o.l4;
  total += o.total;
  l2_active = l2_active || o.l2_active;
  l3_active = l3_active || o.l3_active;
  l4_active = l4_active || o.l4_active;
  return *this;
}

double surrogate_indicator(double p, double pbar, double sharpness) {
  const double z = std::clamp(sharpness * (p - pbar), -kSurrogateExponentLimit, kSurrogateExponentLimit);
  return 1.0 / (1.0 + std::exp(-z));
}

double loss_hesitancy(const Matrix<double>& P, const Matrix<double>& Pbar, LossGradient* grad, double weight) {
  double total = 0.0;
  std::vector<double> r(P.cols());
  for (std::size_t i = 0; i < P.rows(); ++i) {
    double sq = 0.0;
    for (std::size_t l = 0; l < P.cols(); ++l) {
      r[l] = P(i, l) + Pbar(i, l) - 1.0;
      sq += r[l] * r[l];
    }
    const double norm = std::sqrt(sq);
    total += norm;
    if (grad && norm > 0.0) {
      for (std::size_t l = 0; l < P.cols(); ++l) {
        const double g = weight * r[l] / norm;
        grad->entailment(i, l) += g;
        grad->contradiction(i, l) += g;
      }
    }
  }
  return total;
}

namespace {

Matrix<double> surrogates(const Matrix<double>& P, const Matrix<double>& Pbar, double sharpness) {
  Matrix<double> s(P.rows(), P.cols());
  for (std::size_t k = 0; k < P.size(); ++k) {
    s.values()[k] = surrogate_indicator(P.values()[k], Pbar.values()[k], sharpness);
  }
  return s;
}

// Pushes d(loss)/ds through the sigmoid onto P and Pbar.
void chain_surrogate(const Matrix<double>& s, std::size_t i, std::size_t l, double dloss_ds, double sharpness,
                     LossGradient& grad) {
  const double ds = sharpness * s(i, l) * (1.0 - s(i, l));
  grad.entailment(i, l) += dloss_ds * ds;
  grad.contradiction(i, l) -= dloss_ds * ds;
}

}  // namespace

double loss_label_frequency(const Matrix<double>& P, const Matrix<double>& Pbar, std::span<const double> lambdas,
                            double sharpness, double population, LossGradient* grad, double weight) {
  const Matrix<double> s = surrogates(P, Pbar, sharpness);
  double total = 0.0;
  for (std::size_t l = 0; l < P.cols(); ++l) {
    double count = 0.0;
    for (std::size_t i = 0; i < P.rows(); ++i) count += s(i, l);
    const double gap = population * lambdas[l] - count;
    total += gap * gap;
    if (grad) {
      for (std::size_t i = 0; i < P.rows(); ++i) chain_surrogate(s, i, l, -2.0 * gap * weight, sharpness, *grad);
    }
  }
  return total;
}

double loss_cardinality(const Matrix<double>& P, const Matrix<double>& Pbar, double kappa, double sharpness,
                        LossGradient* grad, double weight) {
  const Matrix<double> s = surrogates(P, Pbar, sharpness);
  double total = 0.0;
  for (std::size_t i = 0; i < P.rows(); ++i) {
    double size = 0.0;
    for (std::size_t l = 0; l < P.cols(); ++l) size += s(i, l);
    const double gap = kappa - size;
    total += gap * gap;
    if (grad) {
      for (std::size_t l = 0; l < P.cols(); ++l) chain_surrogate(s, i, l, -2.0 * gap * weight, sharpness, *grad);
    }
  }
  return total;
}

double loss_annotated(const Matrix<double>& P, const Matrix<double>& Pbar, const AnnotatedRows& annotated,
                      LossGradient* grad, double weight) {
  double total = 0.0;
  for (const auto& [row, y] : annotated) {
    for (std::size_t l = 0; l < P.cols(); ++l) {
      const bool positive = y[l] != 0;
      const double x = positive ? P(row, l) : Pbar(row, l);
      const double clamped = std::clamp(x, kLogClampEpsilon, 1.0);
      total -= std::log(clamped);
      if (grad && x > kLogClampEpsilon && x < 1.0) {
        (positive ? grad->entailment : grad->contradiction)(row, l) -= weight / x;
      }
    }
  }
  return total;
}

LossBreakdown total_loss(const Matrix<double>& P, const Matrix<double>& Pbar, const LossConfig& config,
                         const BatchTargets& targets, LossGradient* grad) {
  if (!P.same_shape(Pbar)) throw ValidationError("entailment and contradiction shapes differ");
  if (grad && (!grad->entailment.same_shape(P) || !grad->contradiction.same_shape(P))) {
    *grad = LossGradient(P.rows(), P.cols());
  }
  LossBreakdown b;
  b.l1 = loss_hesitancy(P, Pbar, grad, 1.0);
  b.l2_active = !config.disable_l2 && !targets.lambdas.empty();
  b.l3_active = !config.disable_l3 && targets.kappa.has_value();
  b.l4_active = !targets.annotated.empty();
  if (b.l2_active) {
    if (targets.lambdas.size() != P.cols()) throw ValidationError("lambdas length differs from L");
    b.l2 = loss_label_frequency(P, Pbar, targets.lambdas, config.sharpness, targets.population, grad, config.alpha2);
  }
  if (b.l3_active) b.l3 = loss_cardinality(P, Pbar, *targets.kappa, config.sharpness, grad, config.alpha3);
  if (b.l4_active) b.l4 = loss_annotated(P, Pbar, targets.annotated, grad, config.alpha4);
  b.total = b.l1 + config.alpha2 * b.l2 + config.alpha3 * b.l3 + config.alpha4 * b.l4;
  return b;
}

}  // namespace bncl
