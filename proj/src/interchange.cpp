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

#include <bncl/interchange.hpp>

#include <bncl/error.hpp>

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace bncl {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

EnvelopeHeader parse_header(const unsigned char* bytes, const std::string& source) {
  if (std::memcmp(bytes, kMagic, 4) != 0) {
    throw ValidationError("malformed header in " + source + ": magic is not BNCL");
  }
  EnvelopeHeader h;
  h.version = bytes[4];
  if (h.version != kVersionF32 && h.version != kVersionF64) {
    throw ValidationError("malformed header in " + source + ": unsupported version " +
                          std::to_string(h.version));
  }
  h.rows = get_u32(bytes + 5);
  h.cols = get_u32(bytes + 9);
  h.channels = get_u32(bytes + 13);
  return h;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Envelope read_file_envelope(const fs::path& path) {
  std::ifstream in = open_in(path);
  Envelope env = read_envelope(in, path.string());
  in.peek();
  if (!in.eof()) throw ValidationError("trailing bytes after payload in " + path.string());
  return env;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path candidate(p);
  return candidate.is_absolute() ? candidate : base / candidate;
}

}  // namespace

void write_envelope(std::ostream& out, const EnvelopeHeader& header, const std::vector<double>& values) {
  if (values.size() != header.count()) {
    throw ValidationError("envelope payload has " + std::to_string(values.size()) +
                          " values, header declares " + std::to_string(header.count()));
  }
  std::string buf;
  buf.reserve(kHeaderBytes + values.size() * (header.version == kVersionF64 ? 8 : 4));
  buf.append(kMagic, 4);
  buf.push_back(static_cast<char>(header.version));
  put_u32(buf, header.rows);
  put_u32(buf, header.cols);
  put_u32(buf, header.channels);
  if (header.version == kVersionF64) {
    for (double v : values) put_u64(buf, std::bit_cast<std::uint64_t>(v));
  } else {
    for (double v : values) put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("envelope write failed");
}

Envelope read_envelope(std::istream& in, const std::string& source) {
  unsigned char head[kHeaderBytes];
  in.read(reinterpret_cast<char*>(head), kHeaderBytes);
  if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes)) {
    throw ValidationError("malformed header in " + source + ": file shorter than header");
  }
  Envelope env;
  env.header = parse_header(head, source);
  const std::size_t width = env.header.version == kVersionF64 ? 8 : 4;
  const std::size_t count = env.header.count();
  std::vector<unsigned char> payload(count * width);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    throw ValidationError("dimension mismatch in " + source + ": header declares " +
                          std::to_string(count) + " values but payload is short");
  }
  env.values.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned char* p = payload.data() + k * width;
    env.values[k] = width == 8 ? std::bit_cast<double>(get_u64(p))
                               : static_cast<double>(std::bit_cast<float>(get_u32(p)));
  }
  return env;
}

EnvelopeHeader read_envelope_header(const fs::path& path) {
  std::ifstream in = open_in(path);
  unsigned char head[kHeaderBytes];
  in.read(reinterpret_cast<char*>(head), kHeaderBytes);
  if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes)) {
    throw ValidationError("malformed header in " + path.string() + ": file shorter than header");
  }
  return parse_header(head, path.string());
}

void FeatureMatrix::validate() const {
  for (std::size_t i = 0; i < samples_; ++i) {
    for (std::size_t l = 0; l < labels_; ++l) {
      const double q = entailment(i, l);
      const double n = neutral(i, l);
      const double c = contradiction(i, l);
      if (!(q >= 0.0 && n >= 0.0 && c >= 0.0)) {
        throw ValidationError("negative or non-finite probability at sample " + std::to_string(i) +
                              ", label " + std::to_string(l));
      }
      if (std::abs(q + n + c - 1.0) > kSimplexTolerance) {
        std::ostringstream msg;
        msg << "row-sum violation at sample " << i << ", label " << l << ": " << q + n + c;
        throw ValidationError(msg.str());
      }
    }
  }
}

std::string to_string(Setting setting) {
  switch (setting) {
    case Setting::kAnnotationFree: return "annotation-free";
    case Setting::kScarceAnnotation: return "scarce-annotation";
    case Setting::kDomainSupervisor: return "domain-supervisor";
  }
  return "unknown";
}

Setting parse_setting(const std::string& text) {
  if (text == "annotation-free") return Setting::kAnnotationFree;
  if (text == "scarce-annotation") return Setting::kScarceAnnotation;
  if (text == "domain-supervisor") return Setting::kDomainSupervisor;
  throw ValidationError("unknown setting '" + text + "'");
}

void SupervisionConfig::validate(std::size_t labels, std::optional<std::size_t> samples) const {
  const bool needs_stats = setting != Setting::kScarceAnnotation;
  if (needs_stats && !kappa) throw ValidationError("kappa required for setting " + to_string(setting));
  if (needs_stats && !lambdas) throw ValidationError("lambdas required for setting " + to_string(setting));
  if (kappa && !(*kappa > 0.0 && std::isfinite(*kappa))) {
    throw ValidationError("kappa must be a positive finite number");
  }
  if (lambdas) {
    if (lambdas->size() != labels) {
      throw ValidationError("lambdas has " + std::to_string(lambdas->size()) + " entries, expected L=" +
                            std::to_string(labels));
    }
    for (double v : *lambdas) {
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("lambda outside [0,1]");
    }
  }
  if (setting == Setting::kAnnotationFree && !annotations.empty()) {
    throw ValidationError("annotation-free setting must not carry annotations");
  }
  if (setting != Setting::kAnnotationFree && annotations.empty()) {
    throw ValidationError("setting " + to_string(setting) + " requires annotations");
  }
  for (const auto& [id, y] : annotations) {
    if (samples && id >= *samples) {
      throw ValidationError("annotated sample id " + std::to_string(id) + " outside 0.." +
                            std::to_string(*samples - 1));
    }
    if (y.size() != labels) {
      throw ValidationError("annotation for sample " + std::to_string(id) + " has wrong length");
    }
    bool any = false;
    for (unsigned char b : y) {
      if (b > 1) throw ValidationError("annotation for sample " + std::to_string(id) + " is not binary");
      any = any || b == 1;
    }
    if (!any) throw ValidationError("annotation for sample " + std::to_string(id) + " is empty");
  }
}

void save_features(const FeatureMatrix& features, const fs::path& path) {
  EnvelopeHeader h{kVersionF32, static_cast<std::uint32_t>(features.samples()),
                   static_cast<std::uint32_t>(features.labels()), FeatureMatrix::kChannels};
  std::vector<double> values(features.raw().begin(), features.raw().end());
  std::ostringstream out(std::ios::binary);
  write_envelope(out, h, values);
  write_file(path, out.str());
}

FeatureMatrix load_features(const fs::path& path) {
  Envelope env = read_file_envelope(path);
  if (env.header.version != kVersionF32) {
    throw ValidationError("feature file " + path.string() + " must use the float32 envelope");
  }
  if (env.header.channels != FeatureMatrix::kChannels) {
    throw ValidationError("dimension mismatch in " + path.string() + ": feature files carry 3 channels, found " +
                          std::to_string(env.header.channels));
  }
  FeatureMatrix features(env.header.rows, env.header.cols);
  for (std::size_t k = 0; k < env.values.size(); ++k) features.raw()[k] = static_cast<float>(env.values[k]);
  features.validate();
  return features;
}

FeatureMatrix load_features(const fs::path& path, std::size_t expected_labels) {
  FeatureMatrix f = load_features(path);
  if (f.labels() != expected_labels) {
    throw ValidationError("dimension mismatch: " + path.string() + " has L=" + std::to_string(f.labels()) +
                          ", manifest says L=" + std::to_string(expected_labels));
  }
  return f;
}

void save_embeddings(const LabelEmbeddings& embeddings, const fs::path& path) {
  EnvelopeHeader h{kVersionF32, static_cast<std::uint32_t>(embeddings.labels()),
                   static_cast<std::uint32_t>(embeddings.dimension()), 1};
  std::ostringstream out(std::ios::binary);
  write_envelope(out, h, embeddings.vectors.values());
  write_file(path, out.str());
}

LabelEmbeddings load_embeddings(const fs::path& path) {
  Envelope env = read_file_envelope(path);
  if (env.header.channels != 1) {
    throw ValidationError("dimension mismatch in " + path.string() + ": embedding files carry 1 channel");
  }
  LabelEmbeddings e;
  e.vectors = Matrix<double>(env.header.rows, env.header.cols);
  e.vectors.values() = std::move(env.values);
  for (std::size_t l = 0; l < e.labels(); ++l) {
    bool nonzero = false;
    for (double v : e.vectors.row(l)) {
      if (!std::isfinite(v)) throw ValidationError("non-finite embedding for label " + std::to_string(l));
      nonzero = nonzero || v != 0.0;
    }
    if (!nonzero) throw ValidationError("zero embedding vector for label " + std::to_string(l));
  }
  return e;
}

void save_label_matrix(const LabelMatrix& labels, const fs::path& path) {
  EnvelopeHeader h{kVersionF32, static_cast<std::uint32_t>(labels.rows()),
                   static_cast<std::uint32_t>(labels.cols()), 1};
  std::vector<double> values(labels.values().begin(), labels.values().end());
  std::ostringstream out(std::ios::binary);
  write_envelope(out, h, values);
  write_file(path, out.str());
}

LabelMatrix load_label_matrix(const fs::path& path, bool require_nonempty_rows) {
  Envelope env = read_file_envelope(path);
  if (env.header.channels != 1) {
    throw ValidationError("dimension mismatch in " + path.string() + ": label files carry 1 channel");
  }
  LabelMatrix m(env.header.rows, env.header.cols);
  for (std::size_t k = 0; k < env.values.size(); ++k) {
    const double v = env.values[k];
    if (v != 0.0 && v != 1.0) throw ValidationError("non-binary label value in " + path.string());
    m.values()[k] = static_cast<unsigned char>(v);
  }
  if (require_nonempty_rows) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      bool any = false;
      for (unsigned char b : m.row(i)) any = any || b;
      if (!any) throw ValidationError("empty label set for sample " + std::to_string(i) + " in " + path.string());
    }
  }
  return m;
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  const fs::path base = path.parent_path();
  auto require = [&](const char* key) -> const json& {
    if (!doc.contains(key)) throw ValidationError(std::string("manifest missing field \"") + key + "\"");
    return doc.at(key);
  };

  Manifest m;
  try {
    const json& labels = require("labels");
    if (!labels.is_array() || labels.empty()) throw ValidationError("manifest \"labels\" must be a non-empty array");
    m.labels.descriptions.assign(labels.size(), {});
    std::set<std::size_t> seen;
    for (const json& entry : labels) {
      const auto index = entry.at("index").get<std::size_t>();
      auto description = entry.at("description").get<std::string>();
      if (index >= labels.size()) {
        throw ValidationError("label index " + std::to_string(index) + " outside 0.." +
                              std::to_string(labels.size() - 1));
      }
      if (!seen.insert(index).second) throw ValidationError("duplicate label index " + std::to_string(index));
      if (description.empty()) throw ValidationError("empty description for label " + std::to_string(index));
      m.labels.descriptions[index] = std::move(description);
    }

    SupervisionConfig& sup = m.supervision;
    sup.setting = parse_setting(require("setting").get<std::string>());
    if (doc.contains("kappa") && !doc["kappa"].is_null()) sup.kappa = doc["kappa"].get<double>();
    if (doc.contains("lambdas") && !doc["lambdas"].is_null()) sup.lambdas = doc["lambdas"].get<std::vector<double>>();
    if (doc.contains("annotations") && !doc["annotations"].is_null()) {
      for (const auto& [key, value] : doc["annotations"].items()) {
        std::size_t consumed = 0;
        std::size_t id = 0;
        try {
          id = std::stoul(key, &consumed);
        } catch (const std::exception&) {
          consumed = 0;
        }
        if (consumed != key.size()) throw ValidationError("annotation key '" + key + "' is not a sample id");
        sup.annotations[id] = value.get<LabelVector>();
      }
    }

    m.files.train_features = resolve(base, require("train_features").get<std::string>());
    auto optional_path = [&](const char* key) -> std::optional<fs::path> {
      if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
      return resolve(base, doc[key].get<std::string>());
    };
    m.files.test_features = optional_path("test_features");
    m.files.test_labels = optional_path("test_labels");
    m.files.embeddings = optional_path("embeddings");
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + path.string() + ": " + e.what());
  }

  const std::size_t L = m.labels.size();
  auto check_file = [&](const fs::path& file, std::uint32_t channels, const char* what) -> EnvelopeHeader {
    if (!fs::exists(file)) throw IoError(std::string(what) + " file not found: " + file.string());
    EnvelopeHeader h = read_envelope_header(file);
    if (h.channels != channels) {
      throw ValidationError(std::string("dimension mismatch: ") + what + " file " + file.string() + " has " +
                            std::to_string(h.channels) + " channels, expected " + std::to_string(channels));
    }
    return h;
  };

  EnvelopeHeader train = check_file(m.files.train_features, 3, "train_features");
  if (train.cols != L) {
    throw ValidationError("dimension mismatch: train_features has L=" + std::to_string(train.cols) +
                          ", manifest says L=" + std::to_string(L));
  }
  std::optional<EnvelopeHeader> test;
  if (m.files.test_features) {
    test = check_file(*m.files.test_features, 3, "test_features");
    if (test->cols != L) {
      throw ValidationError("dimension mismatch: test_features has L=" + std::to_string(test->cols) +
                            ", manifest says L=" + std::to_string(L));
    }
  }
  if (m.files.test_labels) {
    EnvelopeHeader h = check_file(*m.files.test_labels, 1, "test_labels");
    if (h.cols != L) throw ValidationError("dimension mismatch: test_labels has L=" + std::to_string(h.cols));
    if (test && h.rows != test->rows) {
      throw ValidationError("dimension mismatch: test_labels has N=" + std::to_string(h.rows) +
                            ", test_features has N=" + std::to_string(test->rows));
    }
  }
  if (m.files.embeddings && fs::exists(*m.files.embeddings)) {
    EnvelopeHeader h = check_file(*m.files.embeddings, 1, "embeddings");
    if (h.rows != L) throw ValidationError("dimension mismatch: embeddings has " + std::to_string(h.rows) + " rows");
  }
  m.supervision.validate(L, train.rows);
  return m;
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) {
    if (p.is_absolute() && !base.empty()) {
      fs::path r = p.lexically_relative(fs::absolute(base));
      if (!r.empty()) return r.generic_string();
    }
    return p.generic_string();
  };
  json doc;
  json labels = json::array();
  for (std::size_t l = 0; l < manifest.labels.size(); ++l) {
    labels.push_back({{"index", l}, {"description", manifest.labels.descriptions[l]}});
  }
  doc["labels"] = labels;
  const SupervisionConfig& sup = manifest.supervision;
  doc["setting"] = to_string(sup.setting);
  doc["kappa"] = sup.kappa ? json(*sup.kappa) : json(nullptr);
  doc["lambdas"] = sup.lambdas ? json(*sup.lambdas) : json(nullptr);
  json ann = json::object();
  for (const auto& [id, y] : sup.annotations) ann[std::to_string(id)] = y;
  doc["annotations"] = ann;
  doc["train_features"] = rel(manifest.files.train_features);
  doc["test_features"] = manifest.files.test_features ? json(rel(*manifest.files.test_features)) : json(nullptr);
  doc["test_labels"] = manifest.files.test_labels ? json(rel(*manifest.files.test_labels)) : json(nullptr);
  doc["embeddings"] = manifest.files.embeddings ? json(rel(*manifest.files.embeddings)) : json(nullptr);
  write_file(path, doc.dump(2) + "\n");
}

}  // namespace bncl
