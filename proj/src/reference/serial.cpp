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

#include <bncl/kernels.hpp>

#include <algorithm>
#include <cmath>

namespace bncl::reference {

void signed_walk_step(const BinaryMatrix& pos_adj, const BinaryMatrix& neg_adj,
                      const Matrix<std::int64_t>& prev_pos, const Matrix<std::int64_t>& prev_neg,
                      Matrix<std::int64_t>& next_pos, Matrix<std::int64_t>& next_neg) {
  const std::size_t n = pos_adj.rows();
  next_pos = Matrix<std::int64_t>(n, n);
  next_neg = Matrix<std::int64_t>(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      std::int64_t even = 0;
      std::int64_t odd = 0;
      for (std::size_t w = 0; w < n; ++w) {
        even += pos_adj(w, u) * prev_pos(w, v) + neg_adj(w, u) * prev_neg(w, v);
        odd += pos_adj(w, u) * prev_neg(w, v) + neg_adj(w, u) * prev_pos(w, v);
      }
      next_pos(u, v) = even;
      next_neg(u, v) = odd;
    }
  }
}

Matrix<double> cosine_similarity(const Matrix<double>& vectors) {
  const std::size_t n = vectors.rows();
  const std::size_t d = vectors.cols();
  Matrix<double> sim(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) {
        sim(u, v) = 1.0;
        continue;
      }
      double dot = 0.0, nu = 0.0, nv = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += vectors(u, j) * vectors(v, j);
      for (std::size_t j = 0; j < d; ++j) nu += vectors(u, j) * vectors(u, j);
      for (std::size_t j = 0; j < d; ++j) nv += vectors(v, j) * vectors(v, j);
      const double a = u < v ? std::sqrt(nu) : std::sqrt(nv);
      const double b = u < v ? std::sqrt(nv) : std::sqrt(nu);
      sim(u, v) = std::clamp(dot / (a * b), -1.0, 1.0);
    }
  }
  return sim;
}

void forward_layers(const ModelParams& masked, HiddenStates& states) {
  const int K = masked.layers;
  const std::size_t L = masked.labels;
  const std::size_t B = states.entailment.front().rows();
  states.entailment.resize(K + 1);
  states.contradiction.resize(K + 1);
  states.pre.assign(static_cast<std::size_t>(kChannelsPerLayer * K), Matrix<double>(B, L));
  for (int k = 1; k <= K; ++k) {
    states.entailment[k] = Matrix<double>(B, L);
    states.contradiction[k] = Matrix<double>(B, L);
    for (std::size_t i = 0; i < B; ++i) {
      for (std::size_t v = 0; v < L; ++v) {
        double s[kChannelsPerLayer] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t u = 0; u < L; ++u) {
          const double hu = states.entailment[k - 1](i, u);
          const double hbu = states.contradiction[k - 1](i, u);
          s[0] += masked.block(k, Channel::kEntPos)(u, v) * hu;
          s[1] += masked.block(k, Channel::kEntNeg)(u, v) * hu;
          s[2] += masked.block(k, Channel::kConPos)(u, v) * hbu;
          s[3] += masked.block(k, Channel::kConNeg)(u, v) * hbu;
        }
        for (int c = 0; c < kChannelsPerLayer; ++c) states.pre[kChannelsPerLayer * (k - 1) + c](i, v) = s[c];
        states.entailment[k](i, v) =
            states.entailment[k - 1](i, v) + std::max(0.0, s[0]) + std::max(0.0, s[3]);
        states.contradiction[k](i, v) =
            states.contradiction[k - 1](i, v) + std::max(0.0, s[1]) + std::max(0.0, s[2]);
      }
    }
  }
}

ModelParams backward_layers(const ModelParams& masked, const SupportMasks& masks, const HiddenStates& states,
                            const Matrix<double>& grad_entailment, const Matrix<double>& grad_contradiction) {
  const int K = masked.layers;
  const std::size_t L = masked.labels;
  const std::size_t B = grad_entailment.rows();
  ModelParams grads = ModelParams::zeros(L, K);
  Matrix<double> g_ent = grad_entailment;
  Matrix<double> g_con = grad_contradiction;

  for (int k = K; k >= 1; --k) {
    Matrix<double> g_ent_prev(B, L), g_con_prev(B, L);
    for (std::size_t i = 0; i < B; ++i) {
      // Gradients at the four pre-activations of this sample.
      std::vector<double> g_pre[kChannelsPerLayer];
      for (int c = 0; c < kChannelsPerLayer; ++c) g_pre[c].assign(L, 0.0);
      for (std::size_t v = 0; v < L; ++v) {
        const auto pre = [&](Channel c) { return states.pre[kChannelsPerLayer * (k - 1) + static_cast<int>(c)](i, v); };
        g_pre[0][v] = pre(Channel::kEntPos) > 0.0 ? g_ent(i, v) : 0.0;
        g_pre[1][v] = pre(Channel::kEntNeg) > 0.0 ? g_con(i, v) : 0.0;
        g_pre[2][v] = pre(Channel::kConPos) > 0.0 ? g_con(i, v) : 0.0;
        g_pre[3][v] = pre(Channel::kConNeg) > 0.0 ? g_ent(i, v) : 0.0;
      }
      for (std::size_t u = 0; u < L; ++u) {
        double se = g_ent(i, u);
        double sc = g_con(i, u);
        for (std::size_t v = 0; v < L; ++v) {
          se += masked.block(k, Channel::kEntPos)(u, v) * g_pre[0][v];
          se += masked.block(k, Channel::kEntNeg)(u, v) * g_pre[1][v];
          sc += masked.block(k, Channel::kConNeg)(u, v) * g_pre[3][v];
          sc += masked.block(k, Channel::kConPos)(u, v) * g_pre[2][v];
        }
        g_ent_prev(i, u) = se;
        g_con_prev(i, u) = sc;
      }
      for (std::size_t u = 0; u < L; ++u) {
        const double hu = states.entailment[k - 1](i, u);
        const double hbu = states.contradiction[k - 1](i, u);
        for (std::size_t v = 0; v < L; ++v) {
          grads.block(k, Channel::kEntPos)(u, v) += hu * g_pre[0][v];
          grads.block(k, Channel::kEntNeg)(u, v) += hu * g_pre[1][v];
          grads.block(k, Channel::kConPos)(u, v) += hbu * g_pre[2][v];
          grads.block(k, Channel::kConNeg)(u, v) += hbu * g_pre[3][v];
        }
      }
    }
    for (int c = 0; c < kChannelsPerLayer; ++c) {
      const auto ch = static_cast<Channel>(c);
      const BinaryMatrix& m = masks.of(k, ch);
      Matrix<double>& g = grads.block(k, ch);
      for (std::size_t u = 0; u < L; ++u)
        for (std::size_t v = 0; v < L; ++v)
          if (!m(u, v)) g(u, v) = 0.0;
    }
    g_ent = std::move(g_ent_prev);
    g_con = std::move(g_con_prev);
  }
  return grads;
}

ConfusionCounts confusion_counts(const BinaryMatrix& truth, const BinaryMatrix& pred) {
  const std::size_t L = truth.cols();
  ConfusionCounts out{std::vector<std::int64_t>(L), std::vector<std::int64_t>(L), std::vector<std::int64_t>(L),
                      std::vector<std::int64_t>(L)};
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    for (std::size_t l = 0; l < L; ++l) {
      const bool y = truth(i, l) != 0;
      const bool p = pred(i, l) != 0;
      if (y && p) ++out.tp[l];
      else if (p) ++out.fp[l];
      else if (y) ++out.fn[l];
      else ++out.tn[l];
    }
  }
  return out;
}

}  // namespace bncl::reference
