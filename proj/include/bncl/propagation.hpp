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

#ifndef BNCL_PROPAGATION_HPP_
#define BNCL_PROPAGATION_HPP_

#include <bncl/interchange.hpp>
#include <bncl/label_graph.hpp>
#include <bncl/matrix.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace bncl {

// The four weight blocks of one update layer, in serialization order.
//   kEntPos  W^(k,+)   entailment of positive neighbours  -> entailment
//   kEntNeg  W^(k,-)   entailment of negative neighbours  -> contradiction
//   kConPos  Wbar^(k,+) contradiction of positive neighbours -> contradiction
//   kConNeg  Wbar^(k,-) contradiction of negative neighbours -> entailment
enum class Channel : int { kEntPos = 0, kEntNeg = 1, kConPos = 2, kConNeg = 3 };
inline constexpr int kChannelsPerLayer = 4;

/// Whether a channel reads the positive (true) or negative neighbourhood.
constexpr bool reads_positive(Channel c) { return c == Channel::kEntPos || c == Channel::kConPos; }

struct ModelParams {
  int layers = 0;
  std::size_t labels = 0;
  std::vector<Matrix<double>> blocks;  // index kChannelsPerLayer*(hop-1) + channel

  static ModelParams zeros(std::size_t labels, int layers);

  Matrix<double>& block(int hop, Channel c) { return blocks[index(hop, c)]; }
  const Matrix<double>& block(int hop, Channel c) const { return blocks[index(hop, c)]; }

  std::size_t parameter_count() const { return blocks.size() * labels * labels; }
  bool same_shape(const ModelParams& other) const { return layers == other.layers && labels == other.labels; }
  bool all_finite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  static std::size_t index(int hop, Channel c) {
    return static_cast<std::size_t>(kChannelsPerLayer * (hop - 1) + static_cast<int>(c));
  }
};

/// Entries i.i.d. uniform on [-scale, scale]; one Rng stream per seed.
ModelParams init_params(std::size_t labels, int layers, std::uint64_t seed, double scale = 0.01);

/// Neighbourhood supports per hop (index hop-1).
struct SupportMasks {
  std::vector<BinaryMatrix> positive;
  std::vector<BinaryMatrix> negative;

  const BinaryMatrix& of(int hop, Channel c) const {
    return reads_positive(c) ? positive[hop - 1] : negative[hop - 1];
  }
};

SupportMasks support_masks(const BalancedNeighborhoods& nbhd);

/// Copy of `params` with every entry outside its neighbourhood support zeroed.
ModelParams apply_masks(const ModelParams& params, const SupportMasks& masks);

/// Batch hidden states for every layer, plus the pre-activations that the
/// backward pass needs. Row i is sample i of the batch.
struct HiddenStates {
  std::vector<Matrix<double>> entailment;     // h^(0..K)
  std::vector<Matrix<double>> contradiction;  // hbar^(0..K)
  std::vector<Matrix<double>> pre;            // per hop and channel, same indexing as ModelParams

  int layers() const { return static_cast<int>(entailment.size()) - 1; }
  std::size_t samples() const { return entailment.empty() ? 0 : entailment.front().rows(); }
  const Matrix<double>& final_entailment() const { return entailment.back(); }
  const Matrix<double>& final_contradiction() const { return contradiction.back(); }
};

/// Layer-0 states: h = q, hbar = qbar. Neutral is not carried.
HiddenStates init_hidden(const FeatureMatrix& features);
/// Same, restricted to the listed sample ids (in order).
HiddenStates init_hidden(const FeatureMatrix& features, const std::vector<std::size_t>& ids);

/// Runs the K balanced-neighbourhood update layers on layer-0 states.
HiddenStates forward(const HiddenStates& initial, const ModelParams& params, const BalancedNeighborhoods& nbhd);

/// y_l = 1 iff final entailment > final contradiction (strict).
LabelMatrix predict(const HiddenStates& states);

/// Zero-shot rule applied to raw (q, qbar).
LabelMatrix baseline_0shot(const FeatureMatrix& features);

/// max(0, 1 - p - pbar); for reporting only.
Matrix<double> display_neutral(const HiddenStates& states);

/// Params file: float32 envelope with rows = 4K*L, cols = L, one channel.
void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path, int layers);

}  // namespace bncl

#endif  // BNCL_PROPAGATION_HPP_
