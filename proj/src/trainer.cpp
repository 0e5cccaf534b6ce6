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

#include <bncl/trainer.hpp>

#include <bncl/error.hpp>
#include <bncl/kernels.hpp>
#include <bncl/rng.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

namespace bncl {

void TrainConfig::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) {
    throw ValidationError("Adam betas must lie in (0, 1)");
  }
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ValidationError("lr_decay must lie in (0, 1]");
  if (lr_step < 1) throw ValidationError("lr_step must be >= 1");
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (!(learning_rate > 0.0) || !(epsilon > 0.0)) throw ValidationError("learning_rate and epsilon must be > 0");
}

OptimizerState OptimizerState::zeros_like(const ModelParams& params) {
  return {ModelParams::zeros(params.labels, params.layers), ModelParams::zeros(params.labels, params.layers), 0};
}

Statistics estimate_statistics(const std::map<std::size_t, LabelVector>& annotations) {
  if (annotations.empty()) throw ValidationError("cannot estimate statistics from an empty annotation set");
  const std::size_t L = annotations.begin()->second.size();
  Statistics s;
  s.lambdas.assign(L, 0.0);
  std::size_t total = 0;
  for (const auto& [id, y] : annotations) {
    if (y.size() != L) throw ValidationError("annotation vectors differ in length");
    for (std::size_t l = 0; l < L; ++l) {
      if (y[l]) {
        ++total;
        s.lambdas[l] += 1.0;
      }
    }
  }
  const double n = static_cast<double>(annotations.size());
  s.kappa = static_cast<double>(total) / n;
  for (double& x : s.lambdas) x /= n;
  return s;
}

SupervisionConfig resolve_supervision(const SupervisionConfig& supervision, std::ostream* log) {
  SupervisionConfig out = supervision;
  if (supervision.setting == Setting::kScarceAnnotation) {
    if (log && (supervision.kappa || supervision.lambdas)) {
      *log << "scarce-annotation: ignoring provided kappa/lambdas, estimating from annotations\n";
    }
    Statistics s = estimate_statistics(supervision.annotations);
    out.kappa = s.kappa;
    out.lambdas = s.lambdas;
    if (log) *log << "estimated kappa_hat = " << s.kappa << " from " << supervision.annotations.size()
                  << " annotated samples\n";
  }
  return out;
}

Objective::Objective(const FeatureMatrix& features, const BalancedNeighborhoods& nbhd, LossConfig loss,
                     SupervisionConfig supervision)
    : features_(features), nbhd_(nbhd), masks_(support_masks(nbhd)), loss_(loss), supervision_(std::move(supervision)) {
  loss_.validate();
  if (nbhd.labels() != features.labels()) {
    throw ValidationError("graph has " + std::to_string(nbhd.labels()) + " labels, features have " +
                          std::to_string(features.labels()));
  }
}

BatchTargets Objective::targets(std::span<const std::size_t> batch) const {
  BatchTargets t;
  t.kappa = supervision_.kappa;
  if (supervision_.lambdas) t.lambdas = *supervision_.lambdas;
  t.population = static_cast<double>(batch.size());
  if (!supervision_.annotations.empty()) {
    for (std::size_t r = 0; r < batch.size(); ++r) {
      auto it = supervision_.annotations.find(batch[r]);
      if (it != supervision_.annotations.end()) t.annotated.emplace_back(r, std::span<const unsigned char>(it->second));
    }
  }
  return t;
}

HiddenStates Objective::run(const ModelParams& masked, std::span<const std::size_t> batch) const {
  HiddenStates s = init_hidden(features_, std::vector<std::size_t>(batch.begin(), batch.end()));
  kernels::forward_layers(masked, s);
  return s;
}

LossBreakdown Objective::loss(const ModelParams& params, std::span<const std::size_t> batch,
                              std::vector<unsigned char>* pattern) const {
  const HiddenStates s = run(apply_masks(params, masks_), batch);
  const BatchTargets t = targets(batch);
  if (pattern) {
    pattern->clear();
    for (const auto& pre : s.pre)
      for (double x : pre.values()) pattern->push_back(x > 0.0);
    for (const auto& [row, y] : t.annotated) {
      for (std::size_t l = 0; l < y.size(); ++l) {
        const double x = y[l] ? s.final_entailment()(row, l) : s.final_contradiction()(row, l);
        pattern->push_back(x > kLogClampEpsilon && x < 1.0);
      }
    }
  }
  return total_loss(s.final_entailment(), s.final_contradiction(), loss_, t);
}

Objective::Evaluation Objective::gradient(const ModelParams& params, std::span<const std::size_t> batch) const {
  const ModelParams masked = apply_masks(params, masks_);
  const HiddenStates s = run(masked, batch);
  LossGradient g(batch.size(), params.labels);
  Evaluation e;
  e.loss = total_loss(s.final_entailment(), s.final_contradiction(), loss_, targets(batch), &g);
  e.gradient = kernels::backward_layers(masked, masks_, s, g.entailment, g.contradiction);
  return e;
}

LossBreakdown Objective::dataset_loss(const ModelParams& params, std::size_t batch_size) const {
  std::vector<std::size_t> ids(features_.samples());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  LossBreakdown total;
  for (std::size_t start = 0; start < ids.size(); start += batch_size) {
    const std::size_t end = std::min(ids.size(), start + batch_size);
    total += loss(params, std::span<const std::size_t>(ids.data() + start, end - start));
  }
  return total;
}

Objective::Evaluation compute_gradients(const Objective& objective, const ModelParams& params,
                                        std::span<const std::size_t> batch) {
  if (batch.empty()) throw ValidationError("compute_gradients needs a non-empty batch");
  Objective::Evaluation e = objective.gradient(params, batch);
  const std::pair<const char*, double> parts[] = {
      {"l1 (hesitancy)", e.loss.l1},
      {"l2 (label frequency)", e.loss.l2},
      {"l3 (cardinality)", e.loss.l3},
      {"l4 (annotated)", e.loss.l4},
  };
  for (const auto& [name, value] : parts) {
    if (!std::isfinite(value)) throw NumericError(std::string("non-finite loss component ") + name);
  }
  if (!e.gradient.all_finite()) throw NumericError("non-finite gradient");
  return e;
}

void adam_step(ModelParams& params, const ModelParams& grads, OptimizerState& state, double lr,
               const TrainConfig& config) {
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment)) {
    throw ValidationError("adam_step shape mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    auto& w = params.blocks[b].values();
    const auto& g = grads.blocks[b].values();
    auto& m = state.first_moment.blocks[b].values();
    auto& v = state.second_moment.blocks[b].values();
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      w[k] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

double lr_at(int epoch, const TrainConfig& config) {
  return config.learning_rate * std::pow(config.lr_decay, epoch / config.lr_step);
}

std::vector<std::size_t> epoch_order(std::size_t samples, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, 0x5EED0000ULL + static_cast<std::uint64_t>(epoch));
  rng.shuffle(order);
  return order;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const ModelParams& p = c.params;
  const std::vector<double> meta = {static_cast<double>(p.layers),
                                    static_cast<double>(p.labels),
                                    static_cast<double>(c.epoch),
                                    static_cast<double>(c.optimizer.step),
                                    c.percentiles.low,
                                    c.percentiles.high,
                                    c.zero_self_walks ? 1.0 : 0.0,
                                    0.0};
  write_envelope(out, {kVersionF64, 1, static_cast<std::uint32_t>(meta.size()), 1}, meta);
  const EnvelopeHeader block_header{kVersionF64, static_cast<std::uint32_t>(p.blocks.size() * p.labels),
                                    static_cast<std::uint32_t>(p.labels), 1};
  for (const ModelParams* m : {&c.params, &c.optimizer.first_moment, &c.optimizer.second_moment}) {
    std::vector<double> values;
    values.reserve(m->parameter_count());
    for (const auto& b : m->blocks) values.insert(values.end(), b.values().begin(), b.values().end());
    write_envelope(out, block_header, values);
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const Envelope meta = read_envelope(in, path.string());
  if (meta.header.rows != 1 || meta.header.cols != 8) throw ValidationError("malformed checkpoint meta block");
  Checkpoint c;
  const int layers = static_cast<int>(meta.values[0]);
  const auto labels = static_cast<std::size_t>(meta.values[1]);
  c.epoch = static_cast<int>(meta.values[2]);
  c.percentiles = {meta.values[4], meta.values[5]};
  c.zero_self_walks = meta.values[6] != 0.0;
  auto read_params = [&]() {
    Envelope env = read_envelope(in, path.string());
    if (env.header.cols != labels || env.header.rows != static_cast<std::size_t>(kChannelsPerLayer * layers) * labels) {
      throw ValidationError("checkpoint block shape disagrees with its meta header");
    }
    ModelParams p = ModelParams::zeros(labels, layers);
    auto it = env.values.begin();
    for (auto& b : p.blocks) {
      std::copy(it, it + static_cast<std::ptrdiff_t>(labels * labels), b.values().begin());
      it += static_cast<std::ptrdiff_t>(labels * labels);
    }
    return p;
  };
  c.params = read_params();
  c.optimizer.first_moment = read_params();
  c.optimizer.second_moment = read_params();
  c.optimizer.step = static_cast<std::uint64_t>(meta.values[3]);
  return c;
}

TrainResult train(const Objective& objective, const TrainConfig& config, const Checkpoint* resume, std::ostream* log) {
  config.validate();
  const std::size_t L = objective.masks().positive.front().rows();
  const int K = static_cast<int>(objective.masks().positive.size());
  TrainResult r;
  if (resume) {
    r.params = resume->params;
    r.optimizer = resume->optimizer;
    r.epochs_completed = resume->epoch;
  } else {
    r.params = init_params(L, K, config.seed, config.init_scale);
    r.optimizer = OptimizerState::zeros_like(r.params);
  }
  const std::size_t N = objective.samples();
  for (int epoch = r.epochs_completed; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = lr_at(epoch, config);
    const std::vector<std::size_t> order = epoch_order(N, config.seed, epoch);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = lr;
    for (std::size_t start = 0; start < N; start += config.batch_size) {
      const std::size_t end = std::min(N, start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      Objective::Evaluation e = compute_gradients(objective, r.params, batch);
      rec.loss += e.loss;
      adam_step(r.params, e.gradient, r.optimizer, lr, config);
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (log) {
      *log << "epoch " << epoch + 1 << "/" << config.epochs << " lr " << lr << " loss " << rec.loss.total
           << " (l1 " << rec.loss.l1 << ", l2 " << rec.loss.l2 << ", l3 " << rec.loss.l3 << ", l4 " << rec.loss.l4
           << ")\n";
    }
    r.history.push_back(rec);
    r.epochs_completed = epoch + 1;
  }
  return r;
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale == 0.0) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport grad_check(const Objective& objective, const ModelParams& params, std::span<const std::size_t> batch,
                           const GradCheckOptions& options) {
  GradCheckReport report;
  Objective::Evaluation analytic = compute_gradients(objective, params, batch);
  const LossBreakdown& lb = analytic.loss;
  const LossConfig& cfg = objective.loss_config();
  const bool l1_only = !((lb.l2_active && cfg.alpha2 > 0.0) || (lb.l3_active && cfg.alpha3 > 0.0) ||
                         (lb.l4_active && cfg.alpha4 > 0.0));
  report.bound = l1_only ? 1e-4 : 1e-3;

  struct Entry {
    std::size_t block, index;
  };
  std::vector<Entry> candidates;
  const SupportMasks& masks = objective.masks();
  for (int k = 1; k <= params.layers; ++k) {
    for (int c = 0; c < kChannelsPerLayer; ++c) {
      const BinaryMatrix& m = masks.of(k, static_cast<Channel>(c));
      const std::size_t b = static_cast<std::size_t>(kChannelsPerLayer * (k - 1) + c);
      for (std::size_t e = 0; e < m.size(); ++e) {
        if (m.values()[e]) candidates.push_back({b, e});
        else ++report.masked_entries;
      }
    }
  }
  Rng rng(options.seed, 0x6C4EC);
  rng.shuffle(candidates);

  std::vector<unsigned char> base_pattern, pattern;
  objective.loss(params, batch, &base_pattern);
  ModelParams probe = params;
  double sum = 0.0;
  for (const Entry& entry : candidates) {
    if (report.compared >= options.entries) break;
    double& w = probe.blocks[entry.block].values()[entry.index];
    const double original = w;
    w = original + options.step;
    const double up = objective.loss(probe, batch, &pattern).total;
    bool kink = pattern != base_pattern;
    w = original - options.step;
    const double down = objective.loss(probe, batch, &pattern).total;
    kink = kink || pattern != base_pattern;
    w = original;
    if (kink) {
      ++report.kink_skipped;
      continue;
    }
    const double numeric = (up - down) / (2.0 * options.step);
    double a = analytic.gradient.blocks[entry.block].values()[entry.index];
    if (options.flip_sign) a = -a;
    const double err = relative_error(a, numeric);
    report.max_rel_error = std::max(report.max_rel_error, err);
    sum += err;
    ++report.compared;
  }
  report.mean_rel_error = report.compared ? sum / static_cast<double>(report.compared) : 0.0;
  report.passed = report.compared > 0 && report.max_rel_error <= report.bound;
  return report;
}

}  // namespace bncl
