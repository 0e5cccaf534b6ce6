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
#include <bncl/interchange.hpp>
#include <bncl/rng.hpp>

#include <doctest.h>
#include <json.hpp>

#include <cstring>
#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace bncl;
using testutil::TempDir;

namespace {

// Envelope bytes assembled by hand, independent of write_envelope.
std::string envelope_bytes(std::uint8_t version, std::uint32_t rows, std::uint32_t cols, std::uint32_t channels,
                           const std::vector<float>& payload) {
  std::string s = "BNCL";
  s.push_back(static_cast<char>(version));
  for (std::uint32_t v : {rows, cols, channels}) {
    for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  }
  for (float f : payload) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  return s;
}

void write_manifest(const std::filesystem::path& p, const nlohmann::json& doc) {
  testutil::write_bytes(p, doc.dump());
}

nlohmann::json three_labels() {
  return nlohmann::json::array({{{"index", 0}, {"description", "wheat"}},
                                {{"index", 1}, {"description", "corn"}},
                                {{"index", 2}, {"description", "interest rates"}}});
}

}  // namespace

TEST_CASE("load_features reads a hand-built file") {
  TempDir dir;
  testutil::write_bytes(dir / "f.bin", envelope_bytes(1, 1, 2, 3, {0.5f, 0.3f, 0.2f, 0.1f, 0.1f, 0.8f}));
  FeatureMatrix f = load_features(dir / "f.bin");
  CHECK(f.samples() == 1);
  CHECK(f.labels() == 2);
  CHECK(f.entailment(0, 0) == 0.5f);
  CHECK(f.neutral(0, 0) == 0.3f);
  CHECK(f.contradiction(0, 1) == 0.8f);
}

TEST_CASE("row off the simplex is rejected with its sample index") {
  TempDir dir;
  testutil::write_bytes(dir / "f.bin", envelope_bytes(1, 1, 1, 3, {0.5f, 0.5f, 0.5f}));
  try {
    load_features(dir / "f.bin");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("sample 0") != std::string::npos);
    CHECK(std::string(e.what()).find("row-sum") != std::string::npos);
  }
}

TEST_CASE("features round-trip bitwise over seeded random matrices") {
  TempDir dir;
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(20), L = 1 + rng.index(9);
    FeatureMatrix f = oracle::random_features(n, L, rng);
    save_features(f, dir / "f.bin");
    FeatureMatrix g = load_features(dir / "f.bin");
    REQUIRE(g.raw().size() == f.raw().size());
    CHECK(std::memcmp(g.raw().data(), f.raw().data(), f.raw().size() * sizeof(float)) == 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < L; ++l) {
        const double s = double(g.entailment(i, l)) + g.neutral(i, l) + g.contradiction(i, l);
        CHECK(std::abs(s - 1.0) <= kSimplexTolerance);
      }
    }
  }
}

TEST_CASE("saving is byte-deterministic and matches the hand-built layout") {
  TempDir dir;
  FeatureMatrix f(1, 2);
  f.set(0, 0, 0.5f, 0.3f, 0.2f);
  f.set(0, 1, 0.1f, 0.1f, 0.8f);
  save_features(f, dir / "a.bin");
  save_features(f, dir / "b.bin");
  CHECK(testutil::read_bytes(dir / "a.bin") == testutil::read_bytes(dir / "b.bin"));
  CHECK(testutil::read_bytes(dir / "a.bin") == envelope_bytes(1, 1, 2, 3, {0.5f, 0.3f, 0.2f, 0.1f, 0.1f, 0.8f}));
}

TEST_CASE("empty feature matrix is a header-only file") {
  TempDir dir;
  FeatureMatrix f(0, 4);
  save_features(f, dir / "e.bin");
  CHECK(testutil::read_bytes(dir / "e.bin").size() == kHeaderBytes);
  FeatureMatrix g = load_features(dir / "e.bin");
  CHECK(g.samples() == 0);
  CHECK(g.labels() == 4);
}

TEST_CASE("malformed envelopes") {
  TempDir dir;
  SUBCASE("bad magic") {
    std::string b = envelope_bytes(1, 1, 1, 3, {1, 0, 0});
    b[0] = 'X';
    testutil::write_bytes(dir / "f.bin", b);
    CHECK_THROWS_AS(load_features(dir / "f.bin"), ValidationError);
  }
  SUBCASE("unknown version") {
    testutil::write_bytes(dir / "f.bin", envelope_bytes(9, 1, 1, 3, {1, 0, 0}));
    CHECK_THROWS_AS(load_features(dir / "f.bin"), ValidationError);
  }
  SUBCASE("truncated payload") {
    std::string b = envelope_bytes(1, 2, 1, 3, {1, 0, 0, 1, 0, 0});
    b.resize(b.size() - 3);
    testutil::write_bytes(dir / "f.bin", b);
    CHECK_THROWS_AS(load_features(dir / "f.bin"), ValidationError);
  }
  SUBCASE("trailing bytes") {
    testutil::write_bytes(dir / "f.bin", envelope_bytes(1, 1, 1, 3, {1, 0, 0}) + "x");
    CHECK_THROWS_AS(load_features(dir / "f.bin"), ValidationError);
  }
  SUBCASE("wrong channel count") {
    testutil::write_bytes(dir / "f.bin", envelope_bytes(1, 1, 1, 1, {1}));
    CHECK_THROWS_AS(load_features(dir / "f.bin"), ValidationError);
  }
  SUBCASE("shorter than the header") {
    testutil::write_bytes(dir / "f.bin", "BNCL");
    CHECK_THROWS_AS(load_features(dir / "f.bin"), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_features(dir / "nope.bin"), IoError);
  }
  SUBCASE("label dimension disagrees") {
    testutil::write_bytes(dir / "f.bin", envelope_bytes(1, 1, 1, 3, {1, 0, 0}));
    CHECK_THROWS_AS(load_features(dir / "f.bin", 2), ValidationError);
  }
}

TEST_CASE("embeddings and label matrices round-trip") {
  TempDir dir;
  LabelEmbeddings e;
  e.vectors = Matrix<double>(3, 2);
  e.vectors(0, 0) = 1;
  e.vectors(1, 1) = -2.5;
  e.vectors(2, 0) = 0.25;
  save_embeddings(e, dir / "e.bin");
  LabelEmbeddings back = load_embeddings(dir / "e.bin");
  CHECK(back.vectors == e.vectors);

  e.vectors(2, 0) = 0;
  save_embeddings(e, dir / "z.bin");
  CHECK_THROWS_AS(load_embeddings(dir / "z.bin"), ValidationError);

  LabelMatrix y(2, 3);
  y(0, 1) = 1;
  y(1, 0) = y(1, 2) = 1;
  save_label_matrix(y, dir / "y.bin");
  CHECK(load_label_matrix(dir / "y.bin") == y);

  y(0, 1) = 0;
  save_label_matrix(y, dir / "y0.bin");
  CHECK_THROWS_AS(load_label_matrix(dir / "y0.bin"), ValidationError);
  CHECK(load_label_matrix(dir / "y0.bin", false) == y);
}

TEST_CASE("manifest loading") {
  TempDir dir;
  FeatureMatrix f(2, 3);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t l = 0; l < 3; ++l) f.set(i, l, 0.25f, 0.5f, 0.25f);
  }
  save_features(f, dir / "train.bin");
  nlohmann::json doc = {{"labels", three_labels()},
                        {"setting", "annotation-free"},
                        {"kappa", 1.5},
                        {"lambdas", {0.5, 0.5, 0.5}},
                        {"train_features", "train.bin"}};

  SUBCASE("consistent L=3 manifest") {
    write_manifest(dir / "m.json", doc);
    Manifest m = load_manifest(dir / "m.json");
    CHECK(m.labels.size() == 3);
    CHECK(m.labels.descriptions[2] == "interest rates");
    CHECK(m.supervision.setting == Setting::kAnnotationFree);
    CHECK(*m.supervision.kappa == 1.5);
    CHECK(m.files.train_features == dir / "train.bin");
  }
  SUBCASE("annotation-free without kappa") {
    doc.erase("kappa");
    write_manifest(dir / "m.json", doc);
    try {
      load_manifest(dir / "m.json");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("kappa required") != std::string::npos);
    }
  }
  SUBCASE("feature file with L=4 against L=3") {
    save_features(FeatureMatrix(2, 4), dir / "wide.bin");
    doc["train_features"] = "wide.bin";
    write_manifest(dir / "m.json", doc);
    try {
      load_manifest(dir / "m.json");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("dimension") != std::string::npos);
    }
  }
  SUBCASE("scarce annotation needs annotations, not statistics") {
    doc["setting"] = "scarce-annotation";
    doc.erase("kappa");
    doc.erase("lambdas");
    write_manifest(dir / "m.json", doc);
    CHECK_THROWS_AS(load_manifest(dir / "m.json"), ValidationError);
    doc["annotations"] = {{"1", {0, 1, 1}}};
    write_manifest(dir / "m.json", doc);
    Manifest m = load_manifest(dir / "m.json");
    CHECK(m.supervision.annotations.at(1) == LabelVector{0, 1, 1});
  }
  SUBCASE("annotation id outside the training set") {
    doc["setting"] = "domain-supervisor";
    doc["annotations"] = {{"2", {1, 0, 0}}};
    write_manifest(dir / "m.json", doc);
    CHECK_THROWS_AS(load_manifest(dir / "m.json"), ValidationError);
  }
  SUBCASE("annotation-free must not carry annotations") {
    doc["annotations"] = {{"0", {1, 0, 0}}};
    write_manifest(dir / "m.json", doc);
    CHECK_THROWS_AS(load_manifest(dir / "m.json"), ValidationError);
  }
  SUBCASE("missing referenced file is an I/O error") {
    doc["test_features"] = "absent.bin";
    write_manifest(dir / "m.json", doc);
    CHECK_THROWS_AS(load_manifest(dir / "m.json"), IoError);
  }
  SUBCASE("malformed JSON") {
    testutil::write_bytes(dir / "m.json", "{ not json");
    CHECK_THROWS_AS(load_manifest(dir / "m.json"), ValidationError);
  }
  SUBCASE("save then load") {
    Manifest m;
    m.labels.descriptions = {"a", "b", "c"};
    m.supervision.setting = Setting::kDomainSupervisor;
    m.supervision.kappa = 2.0;
    m.supervision.lambdas = std::vector<double>{0.1, 0.2, 0.3};
    m.supervision.annotations[0] = {1, 1, 0};
    m.files.train_features = dir / "train.bin";
    save_manifest(m, dir / "m.json");
    Manifest back = load_manifest(dir / "m.json");
    CHECK(back.labels.descriptions == m.labels.descriptions);
    CHECK(back.supervision.lambdas == m.supervision.lambdas);
    CHECK(back.supervision.annotations == m.supervision.annotations);
    CHECK(nlohmann::json::parse(testutil::read_bytes(dir / "m.json"))["train_features"] == "train.bin");
  }
}

TEST_CASE("setting names") {
  for (Setting s : {Setting::kAnnotationFree, Setting::kScarceAnnotation, Setting::kDomainSupervisor}) {
    CHECK(parse_setting(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_setting("fully-supervised"), ValidationError);
}
