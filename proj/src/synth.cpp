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

#include <bncl/synth.hpp>

#include <bncl/error.hpp>
#include <bncl/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bncl {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
  if (labels < 2) throw ValidationError("synthetic data needs L >= 2");
  if (clusters < 1 || clusters > labels) throw ValidationError("cluster_count must lie in 1..L");
  if (!(kappa > 0.0 && kappa <= static_cast<double>(labels))) throw ValidationError("kappa must lie in (0, L]");
  for (double p : {rho_pos, rho_neg, noise}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("rho_pos, rho_neg and noise must lie in [0, 1]");
  }
  if (!(neutral >= 0.0 && neutral < 1.0)) throw ValidationError("neutral mass must lie in [0, 1)");
  if (embedding_dim < 1) throw ValidationError("embedding_dim must be >= 1");
  if (annotated > train) throw ValidationError("annotated subset larger than the training set");
}

namespace {

struct Triple {
  double q, n, c;
};

// Clean triple for a label of the given polarity.
Triple clean_triple(bool present, double neutral, Rng& rng) {
  const double strength = std::clamp(1.0 - neutral - std::min(0.5, std::abs(0.1 * rng.normal())), 0.0, 1.0);
  const double rest = 1.0 - strength;
  const double other = rest * rng.uniform(0.0, 0.5);
  const double mid = rest - other;
  return present ? Triple{strength, mid, other} : Triple{other, mid, strength};
}

Triple feature_triple(bool present, const SynthConfig& cfg, Rng& rng) {
  if (cfg.noise > 0.0 && rng.bernoulli(cfg.noise)) {
    const bool polarity = rng.bernoulli(0.5);
    const Triple t = clean_triple(polarity, cfg.neutral, rng);
    const double m = rng.uniform(0.5, 1.0);
    const double third = 1.0 / 3.0;
    return {(1.0 - m) * t.q + m * third, (1.0 - m) * t.n + m * third, (1.0 - m) * t.c + m * third};
  }
  return clean_triple(present, cfg.neutral, rng);
}

void fill_split(const SynthConfig& cfg, const std::vector<std::size_t>& cluster_of,
                const std::vector<std::vector<std::size_t>>& members, double p_in, double p_out, Rng& rng,
                FeatureMatrix& features, LabelMatrix& truth) {
  const std::size_t L = cfg.labels;
  for (std::size_t i = 0; i < features.samples(); ++i) {
    const std::size_t home = rng.index(cfg.clusters);
    bool any = false;
    for (std::size_t l = 0; l < L; ++l) {
      const bool in = rng.bernoulli(cluster_of[l] == home ? p_in : p_out);
      truth(i, l) = in;
      any = any || in;
    }
    if (!any) truth(i, members[home][rng.index(members[home].size())]) = 1;
    for (std::size_t l = 0; l < L; ++l) {
      Triple t = feature_triple(truth(i, l) != 0, cfg, rng);
      // Neutral absorbs rounding so the float32 row stays on the simplex.
      const auto q = static_cast<float>(t.q);
      const auto c = static_cast<float>(t.c);
      const auto n = static_cast<float>(std::max(0.0, 1.0 - static_cast<double>(q) - static_cast<double>(c)));
      features.set(i, l, q, n, c);
    }
  }
}

}  // namespace

SynthDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t L = cfg.labels;
  SynthDataset d;

  // Contiguous clusters, sizes differing by at most one.
  d.cluster_of.resize(L);
  std::vector<std::vector<std::size_t>> members(cfg.clusters);
  for (std::size_t l = 0; l < L; ++l) {
    d.cluster_of[l] = l * cfg.clusters / L;
    members[d.cluster_of[l]].push_back(l);
  }
  d.labels.descriptions.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    d.labels.descriptions[l] = "topic" + std::to_string(d.cluster_of[l]) + " item" + std::to_string(l);
  }

  // Worst case over home clusters: the largest cluster must be able to reach kappa.
  std::size_t largest = 0;
  for (const auto& m : members) largest = std::max(largest, m.size());
  const double weight_in = cfg.rho_pos;
  const double weight_out = 1.0 - cfg.rho_neg;
  const double expected_raw = static_cast<double>(largest) * weight_in + static_cast<double>(L - largest) * weight_out;
  if (!(expected_raw > 0.0)) throw ValidationError("infeasible kappa: rho_pos = 0 and rho_neg = 1 admit no labels");
  double scale = cfg.kappa / expected_raw;
  const double p_in = scale * weight_in;
  const double p_out = scale * weight_out;
  if (p_in > 1.0 || p_out > 1.0) {
    throw ValidationError("infeasible kappa for this cluster structure: inclusion probability exceeds 1");
  }

  Rng emb_rng(cfg.seed, 1);
  d.embeddings.vectors = Matrix<double>(L, cfg.embedding_dim);
  Matrix<double> centroids(cfg.clusters, cfg.embedding_dim);
  for (double& x : centroids.values()) x = emb_rng.normal();
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t j = 0; j < cfg.embedding_dim; ++j) {
      d.embeddings.vectors(l, j) = centroids(d.cluster_of[l], j) + cfg.embedding_jitter * emb_rng.normal();
    }
  }

  d.train_features = FeatureMatrix(cfg.train, L);
  d.test_features = FeatureMatrix(cfg.test, L);
  d.train_truth = LabelMatrix(cfg.train, L);
  d.test_truth = LabelMatrix(cfg.test, L);
  Rng train_rng(cfg.seed, 2);
  Rng test_rng(cfg.seed, 3);
  fill_split(cfg, d.cluster_of, members, p_in, p_out, train_rng, d.train_features, d.train_truth);
  fill_split(cfg, d.cluster_of, members, p_in, p_out, test_rng, d.test_features, d.test_truth);

  std::size_t total = 0;
  d.lambdas.assign(L, 0.0);
  for (std::size_t i = 0; i < cfg.train; ++i) {
    for (std::size_t l = 0; l < L; ++l) {
      if (d.train_truth(i, l)) {
        ++total;
        d.lambdas[l] += 1.0;
      }
    }
  }
  d.kappa = static_cast<double>(total) / static_cast<double>(cfg.train);
  for (double& x : d.lambdas) x /= static_cast<double>(cfg.train);

  const std::size_t n_annotated = cfg.annotated == 0 ? std::min(L, cfg.train) : cfg.annotated;
  std::vector<std::size_t> ids(cfg.train);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng pick_rng(cfg.seed, 4);
  pick_rng.shuffle(ids);
  for (std::size_t k = 0; k < n_annotated; ++k) {
    auto row = d.train_truth.row(ids[k]);
    d.annotations[ids[k]] = LabelVector(row.begin(), row.end());
  }
  return d;
}

SupervisionConfig make_supervision(const SynthDataset& data, Setting setting) {
  SupervisionConfig s;
  s.setting = setting;
  if (setting != Setting::kScarceAnnotation) {
    s.kappa = data.kappa;
    s.lambdas = data.lambdas;
  }
  if (setting != Setting::kAnnotationFree) s.annotations = data.annotations;
  return s;
}

std::vector<double> quantize_label_frequencies(std::span<const double> lambdas, std::size_t groups) {
  const std::size_t L = lambdas.size();
  if (groups < 1 || groups > L) throw ValidationError("group count must lie in 1..L");
  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lambdas[a] > lambdas[b]; });
  std::vector<double> out(L);
  const std::size_t base = L / groups;
  const std::size_t extra = L % groups;
  std::size_t pos = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    double sum = 0.0;
    for (std::size_t k = pos; k < pos + size; ++k) sum += lambdas[order[k]];
    const double mean = sum / static_cast<double>(size);
    for (std::size_t k = pos; k < pos + size; ++k) out[order[k]] = mean;
    pos += size;
  }
  return out;
}

fs::path write_dataset(const SynthDataset& data, const fs::path& dir, Setting setting, std::size_t quantize_groups) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  save_features(data.train_features, dir / "train_features.bin");
  save_features(data.test_features, dir / "test_features.bin");
  save_label_matrix(data.test_truth, dir / "test_labels.bin");
  save_label_matrix(data.train_truth, dir / "train_labels.bin");
  save_embeddings(data.embeddings, dir / "embeddings.bin");

  Manifest m;
  m.labels = data.labels;
  m.supervision = make_supervision(data, setting);
  if (quantize_groups > 0 && m.supervision.lambdas) {
    m.supervision.lambdas = quantize_label_frequencies(*m.supervision.lambdas, quantize_groups);
  }
  m.files.train_features = "train_features.bin";
  m.files.test_features = fs::path("test_features.bin");
  m.files.test_labels = fs::path("test_labels.bin");
  m.files.embeddings = fs::path("embeddings.bin");
  const fs::path manifest = dir / "manifest.json";
  save_manifest(m, manifest);
  return manifest;
}

}  // namespace bncl
