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

#ifndef BNCL_TESTS_ORACLES_HPP_
#define BNCL_TESTS_ORACLES_HPP_

// Independent, deliberately naive reimplementations used as test oracles.
// None of these call into the library's numeric code.

#include <bncl/interchange.hpp>
#include <bncl/label_graph.hpp>
#include <bncl/propagation.hpp>
#include <bncl/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

using bncl::BinaryMatrix;
using bncl::Matrix;

// Walks x0=u, x1, ..., xk=v over undirected edges, counted by the parity of
// negative edges along the way. Returns {even, odd} counts per (u, v).
inline std::pair<Matrix<std::int64_t>, Matrix<std::int64_t>> walk_parity(const BinaryMatrix& pos,
                                                                         const BinaryMatrix& neg, int k) {
  const std::size_t n = pos.rows();
  Matrix<std::int64_t> even(n, n), odd(n, n);
  std::function<void(std::size_t, std::size_t, int, int)> step = [&](std::size_t start, std::size_t at, int left,
                                                                     int negatives) {
    if (left == 0) {
      (negatives % 2 == 0 ? even : odd)(start, at) += 1;
      return;
    }
    for (std::size_t next = 0; next < n; ++next) {
      if (pos(at, next)) step(start, next, left - 1, negatives);
      if (neg(at, next)) step(start, next, left - 1, negatives + 1);
    }
  };
  for (std::size_t u = 0; u < n; ++u) step(u, u, k, 0);
  return {even, odd};
}

// Random symmetric signed graph with zero diagonal; an edge is never both signs.
inline std::pair<BinaryMatrix, BinaryMatrix> random_signed_graph(std::size_t n, double density, bncl::Rng& rng) {
  BinaryMatrix pos(n, n), neg(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double r = rng.uniform01();
      if (r < density / 2) {
        pos(u, v) = pos(v, u) = 1;
      } else if (r < density) {
        neg(u, v) = neg(v, u) = 1;
      }
    }
  }
  return {pos, neg};
}

inline bncl::SignedLabelGraph graph_from(const BinaryMatrix& pos, const BinaryMatrix& neg) {
  bncl::SignedLabelGraph g;
  g.similarity = Matrix<double>(pos.rows(), pos.cols());
  g.positive = pos;
  g.negative = neg;
  return g;
}

// Smallest observed value x such that at least pct% of the values are <= x.
inline double nearest_rank(const std::vector<double>& values, double pct) {
  double best = 0.0;
  bool found = false;
  for (double x : values) {
    std::size_t at_most = 0;
    for (double y : values) at_most += y <= x;
    if (100.0 * static_cast<double>(at_most) >= pct * static_cast<double>(values.size()) && (!found || x < best)) {
      best = x;
      found = true;
    }
  }
  return best;
}

// Propagation, one scalar at a time, driven by the neighbourhood sets.
struct ScalarStates {
  std::vector<std::vector<double>> h, hbar;  // [sample][label]
};

inline ScalarStates forward(const ScalarStates& start, const bncl::ModelParams& w,
                            const bncl::BalancedNeighborhoods& nbhd) {
  using bncl::Channel;
  ScalarStates s = start;
  for (int k = 1; k <= w.layers; ++k) {
    ScalarStates next = s;
    for (std::size_t i = 0; i < s.h.size(); ++i) {
      for (std::size_t v = 0; v < w.labels; ++v) {
        double a = 0, b = 0, c = 0, d = 0;
        for (std::size_t u : nbhd.positive_set(k, v)) {
          a += w.block(k, Channel::kEntPos)(u, v) * s.h[i][u];
          d += w.block(k, Channel::kConPos)(u, v) * s.hbar[i][u];
        }
        for (std::size_t u : nbhd.negative_set(k, v)) {
          b += w.block(k, Channel::kConNeg)(u, v) * s.hbar[i][u];
          c += w.block(k, Channel::kEntNeg)(u, v) * s.h[i][u];
        }
        next.h[i][v] = s.h[i][v] + std::max(0.0, a) + std::max(0.0, b);
        next.hbar[i][v] = s.hbar[i][v] + std::max(0.0, c) + std::max(0.0, d);
      }
    }
    s = next;
  }
  return s;
}

inline ScalarStates states_of(const bncl::FeatureMatrix& f) {
  ScalarStates s;
  s.h.assign(f.samples(), std::vector<double>(f.labels()));
  s.hbar = s.h;
  for (std::size_t i = 0; i < f.samples(); ++i) {
    for (std::size_t l = 0; l < f.labels(); ++l) {
      s.h[i][l] = f.entailment(i, l);
      s.hbar[i][l] = f.contradiction(i, l);
    }
  }
  return s;
}

// Metrics from a per-instance loop over explicit label sets.
struct NaiveMetrics {
  double acc, ha, ebf1, mif1, maf1;
  std::vector<std::int64_t> tp, fp, fn, tn;
};

inline NaiveMetrics metrics(const BinaryMatrix& y, const BinaryMatrix& yhat) {
  const std::size_t M = y.rows(), L = y.cols();
  NaiveMetrics m{};
  m.tp.assign(L, 0);
  m.fp.assign(L, 0);
  m.fn.assign(L, 0);
  m.tn.assign(L, 0);
  double exact = 0, agree = 0, eb = 0;
  for (std::size_t i = 0; i < M; ++i) {
    std::vector<std::size_t> truth, pred;
    for (std::size_t l = 0; l < L; ++l) {
      if (y(i, l)) truth.push_back(l);
      if (yhat(i, l)) pred.push_back(l);
    }
    exact += truth == pred;
    std::size_t both = 0;
    for (std::size_t a : truth) both += std::count(pred.begin(), pred.end(), a);
    eb += 2.0 * static_cast<double>(both) / static_cast<double>(truth.size() + pred.size());
    for (std::size_t l = 0; l < L; ++l) {
      const bool t = std::count(truth.begin(), truth.end(), l) > 0;
      const bool p = std::count(pred.begin(), pred.end(), l) > 0;
      agree += t == p;
      if (t && p) ++m.tp[l];
      if (!t && p) ++m.fp[l];
      if (t && !p) ++m.fn[l];
      if (!t && !p) ++m.tn[l];
    }
  }
  m.acc = exact / static_cast<double>(M);
  m.ha = agree / static_cast<double>(M * L);
  m.ebf1 = eb / static_cast<double>(M);
  std::int64_t tp = 0, fp = 0, fn = 0;
  double ma = 0;
  for (std::size_t l = 0; l < L; ++l) {
    tp += m.tp[l];
    fp += m.fp[l];
    fn += m.fn[l];
    const double den = static_cast<double>(2 * m.tp[l] + m.fp[l] + m.fn[l]);
    ma += den == 0 ? 0.0 : 2.0 * static_cast<double>(m.tp[l]) / den;
  }
  m.mif1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  m.maf1 = ma / static_cast<double>(L);
  return m;
}

// Random binary matrix; when `nonempty_rows`, every row gets at least one 1.
inline BinaryMatrix random_binary(std::size_t rows, std::size_t cols, double p, bncl::Rng& rng,
                                  bool nonempty_rows) {
  BinaryMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    bool any = false;
    for (std::size_t l = 0; l < cols; ++l) {
      m(i, l) = rng.bernoulli(p);
      any = any || m(i, l);
    }
    if (nonempty_rows && !any) m(i, rng.index(cols)) = 1;
  }
  return m;
}

inline bncl::FeatureMatrix random_features(std::size_t n, std::size_t L, bncl::Rng& rng) {
  bncl::FeatureMatrix f(n, L);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < L; ++l) {
      const double a = rng.uniform01(), b = rng.uniform01(), c = rng.uniform01();
      const double s = a + b + c;
      const auto q = static_cast<float>(a / s);
      const auto qbar = static_cast<float>(c / s);
      f.set(i, l, q, 1.0f - q - qbar, qbar);
    }
  }
  return f;
}

// Mean subset size and per-label frequencies by plain counting.
inline std::pair<double, std::vector<double>> count_statistics(const std::map<std::size_t, bncl::LabelVector>& a,
                                                               std::size_t L) {
  double total = 0;
  std::vector<double> freq(L, 0.0);
  for (const auto& [id, y] : a) {
    for (std::size_t l = 0; l < L; ++l) {
      if (y[l] == 1) {
        total += 1;
        freq[l] += 1;
      }
    }
  }
  for (double& f : freq) f /= static_cast<double>(a.size());
  return {total / static_cast<double>(a.size()), freq};
}

// Central difference of a scalar function of one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle

#endif  // BNCL_TESTS_ORACLES_HPP_
