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

#ifndef BNCL_INTERCHANGE_HPP_
#define BNCL_INTERCHANGE_HPP_

#include <bncl/matrix.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bncl {

// Binary envelope:
//   bytes 0..3   "BNCL"
//   byte  4      version (1 = float32 payload, 2 = float64 payload)
//   u32 LE       rows (N)
//   u32 LE       cols (L)
//   u32 LE       channels
//   payload      rows*cols*channels IEEE-754 little-endian values, row-major
inline constexpr char kMagic[4] = {'B', 'N', 'C', 'L'};
inline constexpr std::uint8_t kVersionF32 = 1;
inline constexpr std::uint8_t kVersionF64 = 2;
inline constexpr std::size_t kHeaderBytes = 17;
inline constexpr double kSimplexTolerance = 1e-5;

struct EnvelopeHeader {
  std::uint8_t version = kVersionF32;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t channels = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(rows) * cols * channels;
  }
};

/// A decoded envelope; values are widened to double regardless of version.
struct Envelope {
  EnvelopeHeader header;
  std::vector<double> values;
};

void write_envelope(std::ostream& out, const EnvelopeHeader& header, const std::vector<double>& values);
Envelope read_envelope(std::istream& in, const std::string& source);
EnvelopeHeader read_envelope_header(const std::filesystem::path& path);

struct LabelSpace {
  std::vector<std::string> descriptions;  // index l -> phi_l

  std::size_t size() const noexcept { return descriptions.size(); }
};

/// Per-sample entailment/neutral/contradiction probabilities, stored exactly as
/// they appear on disk (float32, sample-major, then label, then channel).
class FeatureMatrix {
 public:
  static constexpr std::size_t kChannels = 3;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t samples, std::size_t labels)
      : samples_(samples), labels_(labels), data_(samples * labels * kChannels, 0.0f) {}

  std::size_t samples() const noexcept { return samples_; }
  std::size_t labels() const noexcept { return labels_; }

  float& entailment(std::size_t i, std::size_t l) { return data_[offset(i, l)]; }
  float& neutral(std::size_t i, std::size_t l) { return data_[offset(i, l) + 1]; }
  float& contradiction(std::size_t i, std::size_t l) { return data_[offset(i, l) + 2]; }
  float entailment(std::size_t i, std::size_t l) const { return data_[offset(i, l)]; }
  float neutral(std::size_t i, std::size_t l) const { return data_[offset(i, l) + 1]; }
  float contradiction(std::size_t i, std::size_t l) const { return data_[offset(i, l) + 2]; }

  void set(std::size_t i, std::size_t l, float q, float q_neutral, float q_contra) {
    std::size_t o = offset(i, l);
    data_[o] = q;
    data_[o + 1] = q_neutral;
    data_[o + 2] = q_contra;
  }

  const std::vector<float>& raw() const noexcept { return data_; }
  std::vector<float>& raw() noexcept { return data_; }

  /// Throws ValidationError naming the first sample off the simplex.
  void validate() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t offset(std::size_t i, std::size_t l) const { return (i * labels_ + l) * kChannels; }

  std::size_t samples_ = 0;
  std::size_t labels_ = 0;
  std::vector<float> data_;
};

/// One d-dimensional vector per label (rows = labels).
struct LabelEmbeddings {
  Matrix<double> vectors;

  std::size_t labels() const noexcept { return vectors.rows(); }
  std::size_t dimension() const noexcept { return vectors.cols(); }
};

/// Binary label vectors, one row per sample.
using LabelMatrix = BinaryMatrix;

enum class Setting { kAnnotationFree, kScarceAnnotation, kDomainSupervisor };

std::string to_string(Setting setting);
Setting parse_setting(const std::string& text);

using LabelVector = std::vector<unsigned char>;

struct SupervisionConfig {
  Setting setting = Setting::kAnnotationFree;
  std::optional<double> kappa;
  std::optional<std::vector<double>> lambdas;
  std::map<std::size_t, LabelVector> annotations;  // training sample id -> y_i

  /// Checks the per-setting requirements; `labels` and `samples` bound indices.
  void validate(std::size_t labels, std::optional<std::size_t> samples) const;
};

struct ManifestFiles {
  std::filesystem::path train_features;
  std::optional<std::filesystem::path> test_features;
  std::optional<std::filesystem::path> test_labels;
  std::optional<std::filesystem::path> embeddings;
};

struct Manifest {
  LabelSpace labels;
  SupervisionConfig supervision;
  ManifestFiles files;
};

void save_features(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix load_features(const std::filesystem::path& path);
/// Rejects files whose label dimension disagrees with `expected_labels`.
FeatureMatrix load_features(const std::filesystem::path& path, std::size_t expected_labels);

void save_embeddings(const LabelEmbeddings& embeddings, const std::filesystem::path& path);
LabelEmbeddings load_embeddings(const std::filesystem::path& path);

/// Ground truth uses the envelope with one channel holding 0/1 values.
void save_label_matrix(const LabelMatrix& labels, const std::filesystem::path& path);
LabelMatrix load_label_matrix(const std::filesystem::path& path, bool require_nonempty_rows = true);

/// Parses and validates a manifest. Relative file paths resolve against the
/// manifest's directory; every referenced file header is cross-checked.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace bncl

#endif  // BNCL_INTERCHANGE_HPP_
