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

#ifndef BNCL_LABEL_GRAPH_HPP_
#define BNCL_LABEL_GRAPH_HPP_

#include <bncl/interchange.hpp>
#include <bncl/matrix.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bncl {

using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;
using TokenTable = std::unordered_map<std::string, std::vector<double>>;

/// Splits on ASCII whitespace and lowercases each token.
std::vector<std::string> whitespace_lower_tokenize(std::string_view text);

/// Reads a word-vector text file: one "token v1 v2 ... vd" entry per line.
TokenTable load_word_vectors(const std::filesystem::path& path);

/// Mean of the token vectors of each description. Out-of-vocabulary tokens are
/// skipped with a warning on stderr; a label with no known token is an error.
LabelEmbeddings embed_labels(const LabelSpace& labels, const TokenTable& tokens,
                             const Tokenizer& tokenizer = whitespace_lower_tokenize);

/// Pairwise cosine similarity. Diagonal is exactly 1.
Matrix<double> similarity_matrix(const LabelEmbeddings& embeddings);

struct PercentilePair {
  double low = 10.0;
  double high = 90.0;
};

/// Nearest-rank percentile of an ascending sequence: element ceil(pct/100 * n), 1-based.
double nearest_rank_percentile(const std::vector<double>& sorted, double pct);

struct SignedLabelGraph {
  Matrix<double> similarity;
  BinaryMatrix positive;  // A+
  BinaryMatrix negative;  // A-
  double delta_pos = 0.0;
  double delta_neg = 0.0;
  PercentilePair percentiles;

  std::size_t labels() const noexcept { return positive.rows(); }
  /// Undirected edge counts (upper triangle).
  std::size_t positive_edges() const;
  std::size_t negative_edges() const;
};

/// Thresholds the off-diagonal upper-triangle similarities at the nearest-rank
/// percentiles. Ties at a threshold are included. Throws NumericError when the
/// lower threshold is not strictly below the upper one.
SignedLabelGraph threshold_graph(const Matrix<double>& similarity, PercentilePair pair);

/// Walk counts grouped by negative-edge parity, for hops 1..K.
///
/// dep_pos[k-1](u, v) counts length-k walks between u and v carrying an even
/// number of negative edges, dep_neg[k-1] the odd ones. The neighbourhood
/// N_v^(k,+) is the support of column v of dep_pos[k-1].
struct BalancedNeighborhoods {
  int depth = 0;
  std::vector<Matrix<std::int64_t>> dep_pos;
  std::vector<Matrix<std::int64_t>> dep_neg;

  std::size_t labels() const noexcept { return dep_pos.empty() ? 0 : dep_pos.front().rows(); }

  /// Support masks, one per hop (index k-1).
  BinaryMatrix positive_mask(int hop) const;
  BinaryMatrix negative_mask(int hop) const;

  std::vector<std::size_t> positive_set(int hop, std::size_t v) const;
  std::vector<std::size_t> negative_set(int hop, std::size_t v) const;
};

struct NeighborhoodOptions {
  /// Zero the diagonal of hops >= 2 (drop closed walks back to the label).
  bool zero_self_walks = false;
};

BalancedNeighborhoods balanced_neighborhoods(const SignedLabelGraph& graph, int depth,
                                             NeighborhoodOptions options = {});

/// Text edge list: header comment, then "u v +1|-1" per undirected edge with u < v.
void write_edge_list(const SignedLabelGraph& graph, std::ostream& out);

}  // namespace bncl

#endif  // BNCL_LABEL_GRAPH_HPP_
