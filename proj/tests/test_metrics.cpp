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
#include <bncl/metrics.hpp>
#include <bncl/rng.hpp>

#include <doctest.h>

#include <numeric>

#include "oracles.hpp"

using namespace bncl;

namespace {

BinaryMatrix bin(const std::vector<std::vector<int>>& rows) {
  BinaryMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t l = 0; l < rows[i].size(); ++l) m(i, l) = static_cast<unsigned char>(rows[i][l]);
  }
  return m;
}

void check_all_one(const MetricsReport& r) {
  CHECK(r.acc == 1.0);
  CHECK(r.ha == 1.0);
  CHECK(r.ebf1 == 1.0);
  CHECK(r.mif1 == 1.0);
  CHECK(r.maf1 == 1.0);
}

}  // namespace

TEST_CASE("worked two-sample example") {
  MetricsReport r = compute_all(bin({{1, 1, 0}, {0, 0, 1}}), bin({{1, 0, 0}, {0, 0, 1}}));
  CHECK(r.acc == doctest::Approx(0.5));
  CHECK(r.ha == doctest::Approx(5.0 / 6.0));
  CHECK(r.ebf1 == doctest::Approx(5.0 / 6.0));
  CHECK(r.mif1 == doctest::Approx(0.8));
  CHECK(r.maf1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.samples == 2);
}

TEST_CASE("perfect and complementary predictions") {
  Rng rng(1);
  BinaryMatrix y = oracle::random_binary(20, 6, 0.4, rng, true);
  check_all_one(compute_all(y, y));
  BinaryMatrix c = y;
  for (auto& b : c.values()) b = !b;
  MetricsReport r = compute_all(y, c);
  CHECK(r.acc == 0.0);
  CHECK(r.ha == 0.0);
}

TEST_CASE("confusion counts") {
  Rng rng(2);
  BinaryMatrix y = oracle::random_binary(30, 5, 0.4, rng, true);
  ConfusionCounts none = confusion_per_label(y, BinaryMatrix(30, 5));
  for (std::size_t l = 0; l < 5; ++l) {
    std::int64_t col = 0;
    for (std::size_t i = 0; i < 30; ++i) col += y(i, l);
    CHECK(none.tp[l] == 0);
    CHECK(none.fp[l] == 0);
    CHECK(none.fn[l] == col);
  }
  ConfusionCounts same = confusion_per_label(y, y);
  for (std::size_t l = 0; l < 5; ++l) {
    CHECK(same.fp[l] == 0);
    CHECK(same.fn[l] == 0);
  }
}

TEST_CASE("metrics equal the per-instance oracle") {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    BinaryMatrix y = oracle::random_binary(50, 8, rng.uniform(0.1, 0.6), rng, true);
    BinaryMatrix p = oracle::random_binary(50, 8, rng.uniform(0.05, 0.6), rng, false);
    MetricsReport r = compute_all(y, p);
    oracle::NaiveMetrics o = oracle::metrics(y, p);
    CHECK(r.confusion.tp == o.tp);
    CHECK(r.confusion.fp == o.fp);
    CHECK(r.confusion.fn == o.fn);
    CHECK(r.confusion.tn == o.tn);
    CHECK(std::abs(r.acc - o.acc) <= 1e-12);
    CHECK(std::abs(r.ha - o.ha) <= 1e-12);
    CHECK(std::abs(r.ebf1 - o.ebf1) <= 1e-12);
    CHECK(std::abs(r.mif1 - o.mif1) <= 1e-12);
    CHECK(std::abs(r.maf1 - o.maf1) <= 1e-12);
  }
}

TEST_CASE("metrics are invariant to joint permutations") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const std::size_t M = 5 + rng.index(30), L = 2 + rng.index(7);
    BinaryMatrix y = oracle::random_binary(M, L, 0.3, rng, true);
    BinaryMatrix p = oracle::random_binary(M, L, 0.3, rng, false);
    MetricsReport base = compute_all(y, p);
    std::vector<std::size_t> rows(M), cols(L);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    rng.shuffle(rows);
    rng.shuffle(cols);
    BinaryMatrix y2(M, L), p2(M, L);
    for (std::size_t i = 0; i < M; ++i) {
      for (std::size_t l = 0; l < L; ++l) {
        y2(i, l) = y(rows[i], cols[l]);
        p2(i, l) = p(rows[i], cols[l]);
      }
    }
    MetricsReport r = compute_all(y2, p2);
    CHECK(r.acc == doctest::Approx(base.acc).epsilon(1e-12));
    CHECK(r.ha == doctest::Approx(base.ha).epsilon(1e-12));
    CHECK(r.ebf1 == doctest::Approx(base.ebf1).epsilon(1e-12));
    CHECK(r.mif1 == doctest::Approx(base.mif1).epsilon(1e-12));
    CHECK(r.maf1 == doctest::Approx(base.maf1).epsilon(1e-12));
    if (base.acc == 1.0) check_all_one(base);
  }
}

TEST_CASE("macro F1 counts labels absent from truth and prediction as 0") {
  MetricsReport r = compute_all(bin({{1, 0}}), bin({{1, 0}}));
  CHECK(r.maf1 == doctest::Approx(0.5));
  CHECK(r.acc == 1.0);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(compute_all(bin({{1, 0}}), bin({{1, 0, 0}})), ValidationError);
  CHECK_THROWS_AS(compute_all(BinaryMatrix(0, 3), BinaryMatrix(0, 3)), ValidationError);
  CHECK_THROWS_AS(compute_all(bin({{0, 0}}), bin({{1, 0}})), ValidationError);
}

TEST_CASE("json and table output") {
  MetricsReport r = compute_all(bin({{1, 1, 0}, {0, 0, 1}}), bin({{1, 0, 0}, {0, 0, 1}}));
  nlohmann::json j = to_json(r);
  for (const char* k : {"acc", "ha", "ebf1", "mif1", "maf1"}) CHECK(j.contains(k));
  CHECK_FALSE(j.contains("confusion"));
  CHECK(to_json(r, true).contains("confusion"));
  const std::string table = format_table({{"BNCL", r}, {"0Shot", r}});
  CHECK(table.find("BNCL") != std::string::npos);
  CHECK(table.find("0.8333") != std::string::npos);
}
