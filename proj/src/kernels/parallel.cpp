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

namespace bncl::kernels {

namespace {
inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }
}  // namespace

void signed_walk_step(const BinaryMatrix& pos_adj, const BinaryMatrix& neg_adj,
                      const Matrix<std::int64_t>& prev_pos, const Matrix<std::int64_t>& prev_neg,
                      Matrix<std::int64_t>& next_pos, Matrix<std::int64_t>& next_neg) {
  const auto n = static_cast<std::int64_t>(pos_adj.rows());
  next_pos = Matrix<std::int64_t>(n, n);
  next_neg = Matrix<std::int64_t>(n, n);
#pragma omp parallel for schedule(static)
  for (std::int64_t u = 0; u < n; ++u) {
    auto out_pos = next_pos.row(u);
    auto out_neg = next_neg.row(u);
    for (std::int64_t w = 0; w < n; ++w) {
      const bool plus = pos_adj(w, u) != 0;
      const bool minus = neg_adj(w, u) != 0;
      if (!plus && !minus) continue;
      auto same_pos = prev_pos.row(w);
      auto same_neg = prev_neg.row(w);
      for (std::int64_t v = 0; v < n; ++v) {
        if (plus) {
          out_pos[v] += same_pos[v];
          out_neg[v] += same_neg[v];
        }
        if (minus) {
          out_pos[v] += same_neg[v];
          out_neg[v] += same_pos[v];
        }
      }
    }
  }
}

Matrix<double> cosine_similarity(const Matrix<double>& vectors) {
  const auto n = static_cast<std::int64_t>(vectors.rows());
  const std::size_t d = vectors.cols();
  std::vector<double> norms(n);
  for (std::int64_t u = 0; u < n; ++u) {
    double s = 0.0;
    for (double x : vectors.row(u)) s += x * x;
    norms[u] = std::sqrt(s);
  }
  Matrix<double> sim(n, n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t u = 0; u < n; ++u) {
    sim(u, u) = 1.0;
    auto eu = vectors.row(u);
    for (std::int64_t v = u + 1; v < n; ++v) {
      auto ev = vectors.row(v);
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += eu[j] * ev[j];
      const double c = std::clamp(dot / (norms[u] * norms[v]), -1.0, 1.0);
      sim(u, v) = c;
      sim(v, u) = c;
    }
  }
  return sim;
}

void forward_layers(const ModelParams& masked, HiddenStates& states) {
  const int K = masked.layers;
  const std::size_t L = masked.labels;
  const auto B = static_cast<std::int64_t>(states.entailment.front().rows());
  states.entailment.resize(K + 1);
  states.contradiction.resize(K + 1);
  states.pre.assign(static_cast<std::size_t>(kChannelsPerLayer * K), Matrix<double>(B, L));
  for (int k = 1; k <= K; ++k) {
    states.entailment[k] = Matrix<double>(B, L);
    states.contradiction[k] = Matrix<double>(B, L);
  }

  for (int k = 1; k <= K; ++k) {
    const Matrix<double>& w_ent_pos = masked.block(k, Channel::kEntPos);
    const Matrix<double>& w_ent_neg = masked.block(k, Channel::kEntNeg);
    const Matrix<double>& w_con_pos = masked.block(k, Channel::kConPos);
    const Matrix<double>& w_con_neg = masked.block(k, Channel::kConNeg);
    const Matrix<double>& h_prev = states.entailment[k - 1];
    const Matrix<double>& hb_prev = states.contradiction[k - 1];
    Matrix<double>& pre_ent_pos = states.pre[kChannelsPerLayer * (k - 1) + 0];
    Matrix<double>& pre_ent_neg = states.pre[kChannelsPerLayer * (k - 1) + 1];
    Matrix<double>& pre_con_pos = states.pre[kChannelsPerLayer * (k - 1) + 2];
    Matrix<double>& pre_con_neg = states.pre[kChannelsPerLayer * (k - 1) + 3];
    Matrix<double>& h_next = states.entailment[k];
    Matrix<double>& hb_next = states.contradiction[k];

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < B; ++i) {
      auto h = h_prev.row(i);
      auto hb = hb_prev.row(i);
      auto a = pre_ent_pos.row(i);
      auto c = pre_ent_neg.row(i);
      auto d = pre_con_pos.row(i);
      auto b = pre_con_neg.row(i);
      for (std::size_t u = 0; u < L; ++u) {
        const double hu = h[u];
        const double hbu = hb[u];
        const double* r_ep = w_ent_pos.row(u).data();
        const double* r_en = w_ent_neg.row(u).data();
        const double* r_cp = w_con_pos.row(u).data();
        const double* r_cn = w_con_neg.row(u).data();
        for (std::size_t v = 0; v < L; ++v) {
          a[v] += r_ep[v] * hu;
          c[v] += r_en[v] * hu;
          d[v] += r_cp[v] * hbu;
          b[v] += r_cn[v] * hbu;
        }
      }
      auto hn = h_next.row(i);
      auto hbn = hb_next.row(i);
      for (std::size_t v = 0; v < L; ++v) {
        hn[v] = h[v] + relu(a[v]) + relu(b[v]);
        hbn[v] = hb[v] + relu(c[v]) + relu(d[v]);
      }
    }
  }
}

ModelParams backward_layers(const ModelParams& masked, const SupportMasks& masks, const HiddenStates& states,
                            const Matrix<double>& grad_entailment, const Matrix<double>& grad_contradiction) {
  const int K = masked.layers;
  const std::size_t L = masked.labels;
  const auto B = static_cast<std::int64_t>(grad_entailment.rows());
  ModelParams grads = ModelParams::zeros(L, K);
  Matrix<double> g_ent = grad_entailment;
  Matrix<double> g_con = grad_contradiction;

  for (int k = K; k >= 1; --k) {
    const Matrix<double>& w_ent_pos = masked.block(k, Channel::kEntPos);
    const Matrix<double>& w_ent_neg = masked.block(k, Channel::kEntNeg);
    const Matrix<double>& w_con_pos = masked.block(k, Channel::kConPos);
    const Matrix<double>& w_con_neg = masked.block(k, Channel::kConNeg);
    const Matrix<double>& pre_ent_pos = states.pre[kChannelsPerLayer * (k - 1) + 0];
    const Matrix<double>& pre_ent_neg = states.pre[kChannelsPerLayer * (k - 1) + 1];
    const Matrix<double>& pre_con_pos = states.pre[kChannelsPerLayer * (k - 1) + 2];
    const Matrix<double>& pre_con_neg = states.pre[kChannelsPerLayer * (k - 1) + 3];

    Matrix<double> ga(B, L), gb(B, L), gc(B, L), gd(B, L);
    Matrix<double> g_ent_prev(B, L), g_con_prev(B, L);

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < B; ++i) {
      auto ge = g_ent.row(i);
      auto gcn = g_con.row(i);
      auto ra = ga.row(i), rb = gb.row(i), rc = gc.row(i), rd = gd.row(i);
      for (std::size_t v = 0; v < L; ++v) {
        ra[v] = ge[v] * relu_grad(pre_ent_pos(i, v));
        rb[v] = ge[v] * relu_grad(pre_con_neg(i, v));
        rc[v] = gcn[v] * relu_grad(pre_ent_neg(i, v));
        rd[v] = gcn[v] * relu_grad(pre_con_pos(i, v));
      }
      auto ep = g_ent_prev.row(i);
      auto cp = g_con_prev.row(i);
      for (std::size_t u = 0; u < L; ++u) {
        const double* r_ep = w_ent_pos.row(u).data();
        const double* r_en = w_ent_neg.row(u).data();
        const double* r_cp = w_con_pos.row(u).data();
        const double* r_cn = w_con_neg.row(u).data();
        double se = ge[u];
        double sc = gcn[u];
        for (std::size_t v = 0; v < L; ++v) {
          se += r_ep[v] * ra[v];
          se += r_en[v] * rc[v];
          sc += r_cn[v] * rb[v];
          sc += r_cp[v] * rd[v];
        }
        ep[u] = se;
        cp[u] = sc;
      }
    }

    const Matrix<double>& h = states.entailment[k - 1];
    const Matrix<double>& hb = states.contradiction[k - 1];
    Matrix<double>& d_ent_pos = grads.block(k, Channel::kEntPos);
    Matrix<double>& d_ent_neg = grads.block(k, Channel::kEntNeg);
    Matrix<double>& d_con_pos = grads.block(k, Channel::kConPos);
    Matrix<double>& d_con_neg = grads.block(k, Channel::kConNeg);
    const BinaryMatrix& m_pos = masks.positive[k - 1];
    const BinaryMatrix& m_neg = masks.negative[k - 1];

#pragma omp parallel for schedule(static)
    for (std::int64_t u = 0; u < static_cast<std::int64_t>(L); ++u) {
      auto o_ep = d_ent_pos.row(u), o_en = d_ent_neg.row(u), o_cp = d_con_pos.row(u), o_cn = d_con_neg.row(u);
      for (std::int64_t i = 0; i < B; ++i) {
        const double hu = h(i, u);
        const double hbu = hb(i, u);
        auto ra = ga.row(i), rb = gb.row(i), rc = gc.row(i), rd = gd.row(i);
        for (std::size_t v = 0; v < L; ++v) {
          o_ep[v] += hu * ra[v];
          o_en[v] += hu * rc[v];
          o_cp[v] += hbu * rd[v];
          o_cn[v] += hbu * rb[v];
        }
      }
      for (std::size_t v = 0; v < L; ++v) {
        if (!m_pos(u, v)) {
          o_ep[v] = 0.0;
          o_cp[v] = 0.0;
        }
        if (!m_neg(u, v)) {
          o_en[v] = 0.0;
          o_cn[v] = 0.0;
        }
      }
    }
    g_ent = std::move(g_ent_prev);
    g_con = std::move(g_con_prev);
  }
  return grads;
}

ConfusionCounts confusion_counts(const BinaryMatrix& truth, const BinaryMatrix& pred) {
  const std::size_t M = truth.rows();
  const auto L = static_cast<std::int64_t>(truth.cols());
  ConfusionCounts out{std::vector<std::int64_t>(L), std::vector<std::int64_t>(L), std::vector<std::int64_t>(L),
                      std::vector<std::int64_t>(L)};
#pragma omp parallel for schedule(static)
  for (std::int64_t l = 0; l < L; ++l) {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < M; ++i) {
      const bool y = truth(i, l) != 0;
      const bool p = pred(i, l) != 0;
      tp += y && p;
      fp += !y && p;
      fn += y && !p;
      tn += !y && !p;
    }
    out.tp[l] = tp;
    out.fp[l] = fp;
    out.fn[l] = fn;
    out.tn[l] = tn;
  }
  return out;
}

}  // namespace bncl::kernels
