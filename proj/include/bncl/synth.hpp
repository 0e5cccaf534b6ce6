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

#ifndef BNCL_SYNTH_HPP_
#define BNCL_SYNTH_HPP_

#include <bncl/interchange.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace bncl {

/// Synthetic dataset with planted label clusters.
///
/// Each sample draws a home cluster uniformly; home-cluster labels enter its
/// label set with probability c*rho_pos and outside labels with c*(1-rho_neg),
/// where c is fixed so the expected set size is `kappa`. Samples that draw an
/// empty set receive one random home-cluster label.
///
/// Features: a clean present label gets q = 1 - nu - |e| (e ~ N(0, 0.1),
/// |e| <= 0.5), contradiction a uniform share of at most half the remainder,
/// and neutral the rest; absent labels mirror this. With probability `noise`
/// an entry is corrupted: its triple is replaced by a clean triple of random
/// polarity mixed with (1/3, 1/3, 1/3) at a weight drawn from U(0.5, 1).
///
/// Label embeddings are a per-cluster N(0, I) centroid plus N(0, jitter^2 I).
struct SynthConfig {
  std::size_t labels = 24;
  std::size_t train = 2000;
  std::size_t test = 500;
  std::size_t clusters = 4;
  double rho_pos = 0.9;
  double rho_neg = 0.95;
  double noise = 0.3;
  double neutral = 0.2;
  double kappa = 2.0;
  std::size_t embedding_dim = 16;
  double embedding_jitter = 0.3;
  std::size_t annotated = 0;  // size of D_A; 0 means L
  std::uint64_t seed = 7;

  void validate() const;
};

struct SynthDataset {
  LabelSpace labels;
  FeatureMatrix train_features;
  FeatureMatrix test_features;
  LabelMatrix train_truth;
  LabelMatrix test_truth;
  LabelEmbeddings embeddings;
  std::vector<std::size_t> cluster_of;  // label -> cluster
  double kappa = 0.0;                   // exact, from the training truth
  std::vector<double> lambdas;          // exact, from the training truth
  std::map<std::size_t, LabelVector> annotations;  // random training subset
};

SynthDataset generate(const SynthConfig& config);

/// Supervision for `setting` built from the dataset's statistics/annotations.
SupervisionConfig make_supervision(const SynthDataset& data, Setting setting);

/// Sorts labels by lambda (descending, ties by index), cuts them into `groups`
/// contiguous groups of near-equal size (earlier groups take the remainder),
/// and replaces each lambda by its group mean.
std::vector<double> quantize_label_frequencies(std::span<const double> lambdas, std::size_t groups);

/// Writes manifest.json plus train/test features, test labels, train labels
/// and embeddings into `dir`. Returns the manifest path.
std::filesystem::path write_dataset(const SynthDataset& data, const std::filesystem::path& dir, Setting setting,
                                    std::size_t quantize_groups = 0);

}  // namespace bncl

#endif  // BNCL_SYNTH_HPP_
