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

#include <bncl/error.hpp>
#include <bncl/label_graph.hpp>
#include <bncl/metrics.hpp>
#include <bncl/propagation.hpp>
#include <bncl/synth.hpp>

#include <doctest.h>

#include <numeric>

#include "test_util.hpp"

using namespace bncl;

TEST_CASE("noise-free data is solved by the zero-shot rule") {
  SynthConfig c;
  c.noise = 0.0;
  c.neutral = 0.0;
  c.train = 200;
  c.test = 200;
  SynthDataset d = generate(c);
  CHECK(compute_all(d.test_truth, baseline_0shot(d.test_features)).ebf1 == 1.0);
  CHECK(compute_all(d.train_truth, baseline_0shot(d.train_features)).ebf1 == 1.0);
}

TEST_CASE("feature rows are valid distributions") {
  SynthDataset d = generate(SynthConfig{});
  CHECK_NOTHROW(d.train_features.validate());
  CHECK_NOTHROW(d.test_features.validate());
  for (std::size_t i = 0; i < d.train_features.samples(); ++i) {
    for (std::size_t l = 0; l < 24; ++l) {
      const double s = static_cast<double>(d.train_features.entailment(i, l)) + d.train_features.neutral(i, l) +
                       d.train_features.contradiction(i, l);
      CHECK(std::abs(s - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("reported statistics match the training truth") {
  SynthDataset d = generate(SynthConfig{});
  std::size_t total = 0;
  for (unsigned char b : d.train_truth.values()) total += b;
  CHECK(d.kappa == doctest::Approx(static_cast<double>(total) / 2000.0).epsilon(1e-12));
  CHECK(std::abs(d.kappa - 2.0) < 0.15);
  CHECK(std::accumulate(d.lambdas.begin(), d.lambdas.end(), 0.0) == doctest::Approx(d.kappa));
  for (std::size_t i = 0; i < 2000; ++i) {
    std::size_t row = 0;
    for (std::size_t l = 0; l < 24; ++l) row += d.train_truth(i, l);
    CHECK(row >= 1);
  }
  CHECK(d.annotations.size() == 24);
  for (const auto& [id, y] : d.annotations) {
    auto row = d.train_truth.row(id);
    CHECK(y == LabelVector(row.begin(), row.end()));
  }
}

TEST_CASE("planted clusters give a precise positive graph") {
  SynthDataset d = generate(SynthConfig{});
  SignedLabelGraph g = threshold_graph(similarity_matrix(d.embeddings), {});
  std::size_t intra = 0;
  for (std::size_t u = 0; u < 24; ++u) {
    for (std::size_t v = u + 1; v < 24; ++v) {
      if (g.positive(u, v)) intra += d.cluster_of[u] == d.cluster_of[v];
      if (g.negative(u, v)) CHECK(d.cluster_of[u] != d.cluster_of[v]);
    }
  }
  // The 90th percentile admits about 10% of the 276 pairs, fewer than the 60
  // intra-cluster pairs, so recall is bounded by the percentile and only
  // precision is a meaningful target.
  MESSAGE("positive edges " << g.positive_edges() << ", intra-cluster " << intra);
  CHECK(g.positive_edges() > 0);
  CHECK(static_cast<double>(intra) >= 0.8 * static_cast<double>(g.positive_edges()));
}

TEST_CASE("label frequency quantization") {
  const std::vector<double> lam{0.8, 0.6, 0.2, 0.1};
  CHECK(quantize_label_frequencies(lam, 4) == lam);
  std::vector<double> one = quantize_label_frequencies(lam, 1);
  for (double x : one) CHECK(x == doctest::Approx(0.425));
  std::vector<double> two = quantize_label_frequencies(lam, 2);
  CHECK(two[0] == doctest::Approx(0.7));
  CHECK(two[1] == doctest::Approx(0.7));
  CHECK(two[2] == doctest::Approx(0.15));
  CHECK(two[3] == doctest::Approx(0.15));

  const std::vector<double> shuffled{0.1, 0.8, 0.2, 0.6, 0.6};
  for (std::size_t k = 1; k <= shuffled.size(); ++k) {
    std::vector<double> q = quantize_label_frequencies(shuffled, k);
    CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(2.3));
  }
  CHECK_THROWS_AS(quantize_label_frequencies(lam, 0), ValidationError);
  CHECK_THROWS_AS(quantize_label_frequencies(lam, 5), ValidationError);
}

TEST_CASE("generation is deterministic in the seed") {
  SynthConfig c;
  c.train = 100;
  c.test = 50;
  SynthDataset a = generate(c), b = generate(c);
  CHECK(a.train_features.raw() == b.train_features.raw());
  CHECK(a.test_truth == b.test_truth);
  CHECK(a.embeddings.vectors == b.embeddings.vectors);
  c.seed = 8;
  CHECK(generate(c).train_features.raw() != a.train_features.raw());
}

TEST_CASE("invalid and infeasible configurations") {
  SynthConfig big;
  big.labels = 8;
  big.clusters = 2;
  big.kappa = 7.0;
  CHECK_THROWS_AS(generate(big), ValidationError);
  SynthConfig none;
  none.rho_pos = 0.0;
  none.rho_neg = 1.0;
  CHECK_THROWS_AS(generate(none), ValidationError);
  SynthConfig bad;
  bad.clusters = 30;
  CHECK_THROWS_AS(generate(bad), ValidationError);
}

TEST_CASE("written datasets load back") {
  SynthConfig c;
  c.train = 60;
  c.test = 20;
  SynthDataset d = generate(c);
  testutil::TempDir dir;
  const auto path = write_dataset(d, dir.path() / "data", Setting::kDomainSupervisor, 2);
  Manifest m = load_manifest(path);
  CHECK(m.labels.descriptions == d.labels.descriptions);
  CHECK(m.supervision.setting == Setting::kDomainSupervisor);
  CHECK(*m.supervision.kappa == doctest::Approx(d.kappa));
  CHECK(*m.supervision.lambdas == quantize_label_frequencies(d.lambdas, 2));
  CHECK(m.supervision.annotations == d.annotations);
  CHECK(load_features(m.files.train_features).raw() == d.train_features.raw());
  CHECK(load_label_matrix(*m.files.test_labels) == d.test_truth);

  write_dataset(d, dir.path() / "again", Setting::kDomainSupervisor, 2);
  for (const char* f : {"manifest.json", "train_features.bin", "embeddings.bin"}) {
    CHECK(testutil::read_bytes(dir.path() / "data" / f) == testutil::read_bytes(dir.path() / "again" / f));
  }
}
