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

#include <bncl/propagation.hpp>

#include <bncl/error.hpp>
#include <bncl/kernels.hpp>
#include <bncl/rng.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bncl {

ModelParams ModelParams::zeros(std::size_t labels, int layers) {
  ModelParams p;
  p.layers = layers;
  p.labels = labels;
  p.blocks.assign(static_cast<std::size_t>(kChannelsPerLayer * layers), Matrix<double>(labels, labels));
  return p;
}

bool ModelParams::all_finite() const {
  for (const auto& b : blocks)
    for (double x : b.values())
      if (!std::isfinite(x)) return false;
  return true;
}

ModelParams init_params(std::size_t labels, int layers, std::uint64_t seed, double scale) {
  if (labels < 1 || layers < 1) throw ValidationError("init_params needs L >= 1 and K >= 1");
  ModelParams p = ModelParams::zeros(labels, layers);
  Rng rng(seed, 0x1A17);
  for (auto& b : p.blocks)
    for (double& x : b.values()) x = rng.uniform(-scale, scale);
  return p;
}

SupportMasks support_masks(const BalancedNeighborhoods& nbhd) {
  SupportMasks m;
  for (int k = 1; k <= nbhd.depth; ++k) {
    m.positive.push_back(nbhd.positive_mask(k));
    m.negative.push_back(nbhd.negative_mask(k));
  }
  return m;
}

ModelParams apply_masks(const ModelParams& params, const SupportMasks& masks) {
  if (static_cast<int>(masks.positive.size()) != params.layers) {
    throw ValidationError("params have " + std::to_string(params.layers) + " layers, neighbourhoods have " +
                          std::to_string(masks.positive.size()));
  }
  ModelParams out = params;
  for (int k = 1; k <= params.layers; ++k) {
    for (int c = 0; c < kChannelsPerLayer; ++c) {
      const auto ch = static_cast<Channel>(c);
      const BinaryMatrix& m = masks.of(k, ch);
      if (m.rows() != params.labels) throw ValidationError("params and neighbourhoods disagree on L");
      auto& w = out.block(k, ch).values();
      for (std::size_t e = 0; e < w.size(); ++e)
        if (!m.values()[e]) w[e] = 0.0;
    }
  }
  return out;
}

HiddenStates init_hidden(const FeatureMatrix& features) {
  std::vector<std::size_t> ids(features.samples());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return init_hidden(features, ids);
}

HiddenStates init_hidden(const FeatureMatrix& features, const std::vector<std::size_t>& ids) {
  const std::size_t L = features.labels();
  HiddenStates s;
  s.entailment.emplace_back(ids.size(), L);
  s.contradiction.emplace_back(ids.size(), L);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    for (std::size_t l = 0; l < L; ++l) {
      s.entailment[0](r, l) = features.entailment(ids[r], l);
      s.contradiction[0](r, l) = features.contradiction(ids[r], l);
    }
  }
  return s;
}

HiddenStates forward(const HiddenStates& initial, const ModelParams& params, const BalancedNeighborhoods& nbhd) {
  if (initial.entailment.empty()) throw ValidationError("forward needs layer-0 states");
  if (initial.entailment.front().cols() != params.labels || nbhd.labels() != params.labels) {
    throw ValidationError("dimension mismatch between states, params and neighbourhoods");
  }
  if (nbhd.depth != params.layers) {
    throw ValidationError("params have " + std::to_string(params.layers) + " layers, neighbourhoods depth " +
                          std::to_string(nbhd.depth));
  }
  HiddenStates s;
  s.entailment = {initial.entailment.front()};
  s.contradiction = {initial.contradiction.front()};
  kernels::forward_layers(apply_masks(params, support_masks(nbhd)), s);
  return s;
}

LabelMatrix predict(const HiddenStates& states) {
  const Matrix<double>& p = states.final_entailment();
  const Matrix<double>& pb = states.final_contradiction();
  LabelMatrix y(p.rows(), p.cols());
  for (std::size_t k = 0; k < p.size(); ++k) y.values()[k] = p.values()[k] > pb.values()[k];
  return y;
}

LabelMatrix baseline_0shot(const FeatureMatrix& features) {
  LabelMatrix y(features.samples(), features.labels());
  for (std::size_t i = 0; i < features.samples(); ++i)
    for (std::size_t l = 0; l < features.labels(); ++l)
      y(i, l) = features.entailment(i, l) > features.contradiction(i, l);
  return y;
}

Matrix<double> display_neutral(const HiddenStates& states) {
  const Matrix<double>& p = states.final_entailment();
  const Matrix<double>& pb = states.final_contradiction();
  Matrix<double> n(p.rows(), p.cols());
  for (std::size_t k = 0; k < p.size(); ++k) n.values()[k] = std::max(0.0, 1.0 - p.values()[k] - pb.values()[k]);
  return n;
}

void save_params(const ModelParams& params, const std::filesystem::path& path) {
  EnvelopeHeader h{kVersionF32, static_cast<std::uint32_t>(params.blocks.size() * params.labels),
                   static_cast<std::uint32_t>(params.labels), 1};
  std::vector<double> values;
  values.reserve(params.parameter_count());
  for (const auto& b : params.blocks) values.insert(values.end(), b.values().begin(), b.values().end());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_envelope(out, h, values);
}

ModelParams load_params(const std::filesystem::path& path, int layers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Envelope env = read_envelope(in, path.string());
  const std::size_t L = env.header.cols;
  if (env.header.channels != 1 || env.header.rows != static_cast<std::size_t>(kChannelsPerLayer * layers) * L) {
    throw ValidationError("params file " + path.string() + " does not hold " + std::to_string(layers) +
                          " layers of L x L blocks");
  }
  ModelParams p = ModelParams::zeros(L, layers);
  auto it = env.values.begin();
  for (auto& b : p.blocks) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(L * L), b.values().begin());
    it += static_cast<std::ptrdiff_t>(L * L);
  }
  return p;
}

}  // namespace bncl
