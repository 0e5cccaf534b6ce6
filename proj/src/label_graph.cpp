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

#include <bncl/label_graph.hpp>

#include <bncl/error.hpp>
#include <bncl/kernels.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>

namespace bncl {

std::vector<std::string> whitespace_lower_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

TokenTable load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word vectors " + path.string());
  TokenTable table;
  std::string line;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> vec;
    double x;
    while (fields >> x) vec.push_back(x);
    if (vec.empty()) throw ValidationError("word vector line " + std::to_string(line_no) + " has no values");
    if (dim == 0) dim = vec.size();
    if (vec.size() != dim) {
      throw ValidationError("word vector line " + std::to_string(line_no) + " has dimension " +
                            std::to_string(vec.size()) + ", expected " + std::to_string(dim));
    }
    table.emplace(std::move(token), std::move(vec));
  }
  return table;
}

LabelEmbeddings embed_labels(const LabelSpace& labels, const TokenTable& tokens, const Tokenizer& tokenizer) {
  std::size_t dim = tokens.empty() ? 0 : tokens.begin()->second.size();
  LabelEmbeddings out;
  out.vectors = Matrix<double>(labels.size(), dim);
  for (std::size_t l = 0; l < labels.size(); ++l) {
    std::size_t kept = 0;
    auto row = out.vectors.row(l);
    for (const std::string& tok : tokenizer(labels.descriptions[l])) {
      auto it = tokens.find(tok);
      if (it == tokens.end()) {
        std::cerr << "warning: label " << l << " (\"" << labels.descriptions[l] << "\"): token '" << tok
                  << "' has no embedding, skipped\n";
        continue;
      }
      if (it->second.size() != dim) throw ValidationError("token '" + tok + "' has inconsistent dimension");
      for (std::size_t j = 0; j < dim; ++j) row[j] += it->second[j];
      ++kept;
    }
    if (kept == 0) {
      throw ValidationError("label " + std::to_string(l) + " (\"" + labels.descriptions[l] +
                            "\") has no token with a known embedding");
    }
    for (double& x : row) x /= static_cast<double>(kept);
  }
  return out;
}

Matrix<double> similarity_matrix(const LabelEmbeddings& embeddings) {
  for (std::size_t l = 0; l < embeddings.labels(); ++l) {
    double s = 0.0;
    for (double x : embeddings.vectors.row(l)) s += x * x;
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw NumericError("label " + std::to_string(l) + " has a zero-norm embedding");
    }
  }
  return kernels::cosine_similarity(embeddings.vectors);
}

double nearest_rank_percentile(const std::vector<double>& sorted, double pct) {
  if (sorted.empty()) throw NumericError("percentile of an empty distribution");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::size_t SignedLabelGraph::positive_edges() const {
  std::size_t n = 0;
  for (std::size_t u = 0; u < labels(); ++u)
    for (std::size_t v = u + 1; v < labels(); ++v) n += positive(u, v);
  return n;
}

std::size_t SignedLabelGraph::negative_edges() const {
  std::size_t n = 0;
  for (std::size_t u = 0; u < labels(); ++u)
    for (std::size_t v = u + 1; v < labels(); ++v) n += negative(u, v);
  return n;
}

SignedLabelGraph threshold_graph(const Matrix<double>& similarity, PercentilePair pair) {
  if (!(pair.low > 0.0 && pair.high < 100.0 && pair.low < pair.high)) {
    throw NumericError("percentile pair must satisfy 0 < low < high < 100");
  }
  const std::size_t L = similarity.rows();
  if (L < 2) throw NumericError("graph needs at least two labels");
  std::vector<double> values;
  values.reserve(L * (L - 1) / 2);
  for (std::size_t u = 0; u < L; ++u)
    for (std::size_t v = u + 1; v < L; ++v) values.push_back(similarity(u, v));
  std::sort(values.begin(), values.end());

  SignedLabelGraph g;
  g.similarity = similarity;
  g.percentiles = pair;
  g.delta_neg = nearest_rank_percentile(values, pair.low);
  g.delta_pos = nearest_rank_percentile(values, pair.high);
  if (!(g.delta_neg < g.delta_pos)) {
    std::ostringstream msg;
    msg << "degenerate thresholds: delta- = " << g.delta_neg << " is not below delta+ = " << g.delta_pos
        << " at percentiles (" << pair.low << ", " << pair.high << "); use a wider percentile pair";
    throw NumericError(msg.str());
  }
  g.positive = BinaryMatrix(L, L);
  g.negative = BinaryMatrix(L, L);
  for (std::size_t u = 0; u < L; ++u) {
    for (std::size_t v = 0; v < L; ++v) {
      if (u == v) continue;
      const double d = similarity(u, v);
      g.positive(u, v) = d >= g.delta_pos;
      g.negative(u, v) = d <= g.delta_neg;
    }
  }
  return g;
}

namespace {
BinaryMatrix support(const Matrix<std::int64_t>& m) {
  BinaryMatrix s(m.rows(), m.cols());
  for (std::size_t k = 0; k < m.size(); ++k) s.values()[k] = m.values()[k] > 0;
  return s;
}

std::vector<std::size_t> column_support(const Matrix<std::int64_t>& m, std::size_t v) {
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < m.rows(); ++u)
    if (m(u, v) > 0) out.push_back(u);
  return out;
}
}  // namespace

BinaryMatrix BalancedNeighborhoods::positive_mask(int hop) const { return support(dep_pos.at(hop - 1)); }
BinaryMatrix BalancedNeighborhoods::negative_mask(int hop) const { return support(dep_neg.at(hop - 1)); }

std::vector<std::size_t> BalancedNeighborhoods::positive_set(int hop, std::size_t v) const {
  return column_support(dep_pos.at(hop - 1), v);
}
std::vector<std::size_t> BalancedNeighborhoods::negative_set(int hop, std::size_t v) const {
  return column_support(dep_neg.at(hop - 1), v);
}

BalancedNeighborhoods balanced_neighborhoods(const SignedLabelGraph& graph, int depth, NeighborhoodOptions options) {
  if (depth < 1) throw NumericError("neighbourhood depth must be at least 1");
  const std::size_t L = graph.labels();
  BalancedNeighborhoods n;
  n.depth = depth;
  Matrix<std::int64_t> pos(L, L), neg(L, L);
  for (std::size_t k = 0; k < L * L; ++k) {
    pos.values()[k] = graph.positive.values()[k];
    neg.values()[k] = graph.negative.values()[k];
  }
  n.dep_pos.push_back(pos);
  n.dep_neg.push_back(neg);
  for (int k = 2; k <= depth; ++k) {
    Matrix<std::int64_t> next_pos, next_neg;
    kernels::signed_walk_step(graph.positive, graph.negative, n.dep_pos.back(), n.dep_neg.back(), next_pos,
                              next_neg);
    n.dep_pos.push_back(std::move(next_pos));
    n.dep_neg.push_back(std::move(next_neg));
  }
  if (options.zero_self_walks) {
    for (int k = 2; k <= depth; ++k) {
      for (std::size_t v = 0; v < L; ++v) {
        n.dep_pos[k - 1](v, v) = 0;
        n.dep_neg[k - 1](v, v) = 0;
      }
    }
  }
  return n;
}

void write_edge_list(const SignedLabelGraph& graph, std::ostream& out) {
  out << "# labels " << graph.labels() << " positive " << graph.positive_edges() << " negative "
      << graph.negative_edges() << "\n";
  out.precision(17);
  out << "# delta_pos " << graph.delta_pos << " delta_neg " << graph.delta_neg << "\n";
  for (std::size_t u = 0; u < graph.labels(); ++u) {
    for (std::size_t v = u + 1; v < graph.labels(); ++v) {
      if (graph.positive(u, v)) out << u << ' ' << v << " +1\n";
      if (graph.negative(u, v)) out << u << ' ' << v << " -1\n";
    }
  }
}

}  // namespace bncl
