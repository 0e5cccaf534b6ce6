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

#include <bncl/cli.hpp>

#include <bncl/error.hpp>
#include <bncl/interchange.hpp>
#include <bncl/label_graph.hpp>
#include <bncl/metrics.hpp>
#include <bncl/propagation.hpp>
#include <bncl/synth.hpp>
#include <bncl/trainer.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace bncl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flat run configuration. Keys of the JSON config file are the field names;
// the matching flag is the key with '_' replaced by '-'.
struct RunConfig {
  TrainConfig train;
  LossConfig loss;
  int layers = 2;
  double pct_low = 10.0;
  double pct_high = 90.0;
  bool zero_self_walks = false;
  std::string setting;  // empty: keep the manifest's setting
  std::string word_vectors;

  PercentilePair percentiles() const { return {pct_low, pct_high}; }
};

json to_json(const RunConfig& c) {
  return {
      {"learning_rate", c.train.learning_rate}, {"beta1", c.train.beta1},
      {"beta2", c.train.beta2},                 {"epsilon", c.train.epsilon},
      {"batch_size", c.train.batch_size},       {"epochs", c.train.epochs},
      {"lr_step", c.train.lr_step},             {"lr_decay", c.train.lr_decay},
      {"seed", c.train.seed},                   {"init_scale", c.train.init_scale},
      {"alpha2", c.loss.alpha2},                {"alpha3", c.loss.alpha3},
      {"alpha4", c.loss.alpha4},                {"sharpness", c.loss.sharpness},
      {"disable_l2", c.loss.disable_l2},        {"disable_l3", c.loss.disable_l3},
      {"layers", c.layers},                     {"pct_low", c.pct_low},
      {"pct_high", c.pct_high},                 {"zero_self_walks", c.zero_self_walks},
      {"setting", c.setting},                   {"word_vectors", c.word_vectors},
  };
}

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

// Options that may also come from the config file.
class Registry {
 public:
  explicit Registry(CLI::App* app) : app_(app) {}

  template <class T>
  void option(const std::string& key, T& target, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + dashed(key), target, help)->capture_default_str();
    entries_[key] = {opt, [&target](const json& j) { target = j.get<T>(); }};
  }

  void flag(const std::string& key, bool& target, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + dashed(key), target, help);
    entries_[key] = {opt, [&target](const json& j) { target = j.get<bool>(); }};
  }

  /// Fills every option not given on the command line from `config`.
  void apply(const json& config) const {
    if (!config.is_object()) throw ValidationError("config file must hold a JSON object");
    for (const auto& [key, value] : config.items()) {
      auto it = entries_.find(key);
      if (it == entries_.end()) throw ValidationError("unknown config key '" + key + "'");
      if (it->second.option->count() > 0) continue;
      try {
        it->second.assign(value);
      } catch (const json::exception&) {
        throw ValidationError("config key '" + key + "' has the wrong type");
      }
    }
  }

  bool given(const std::string& key) const { return entries_.at(key).option->count() > 0; }

 private:
  struct Entry {
    CLI::Option* option;
    std::function<void(const json&)> assign;
  };
  CLI::App* app_;
  std::map<std::string, Entry> entries_;
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ValidationError("BNCL_SEED is not an unsigned integer: '" + text + "'");
  return v;
}

// Settings resolved after parsing: config file first, then BNCL_SEED.
struct Common {
  std::string manifest;
  std::string out;
  std::string config;
};

void finish_config(const Registry& reg, const Common& common) {
  if (!common.config.empty()) reg.apply(read_json(common.config));
}

void seed_fallback(const Registry& reg, const Common& common, std::uint64_t& seed) {
  if (reg.given("seed")) return;
  if (!common.config.empty() && read_json(common.config).contains("seed")) return;
  if (const char* env = std::getenv("BNCL_SEED")) seed = parse_seed(env);
}

void register_run_options(Registry& reg, RunConfig& c) {
  reg.option("learning_rate", c.train.learning_rate, "Adam learning rate");
  reg.option("beta1", c.train.beta1, "Adam first-moment decay");
  reg.option("beta2", c.train.beta2, "Adam second-moment decay");
  reg.option("epsilon", c.train.epsilon, "Adam epsilon");
  reg.option("batch_size", c.train.batch_size, "mini-batch size");
  reg.option("epochs", c.train.epochs, "training epochs");
  reg.option("lr_step", c.train.lr_step, "epochs between learning-rate decays");
  reg.option("lr_decay", c.train.lr_decay, "learning-rate decay factor");
  reg.option("seed", c.train.seed, "seed (falls back to BNCL_SEED)");
  reg.option("init_scale", c.train.init_scale, "weights start uniform on +-scale");
  reg.option("alpha2", c.loss.alpha2, "weight of the label-frequency loss");
  reg.option("alpha3", c.loss.alpha3, "weight of the cardinality loss");
  reg.option("alpha4", c.loss.alpha4, "weight of the annotated-sample loss");
  reg.option("sharpness", c.loss.sharpness, "sigmoid sharpness C");
  reg.flag("disable_l2", c.loss.disable_l2, "drop the label-frequency loss");
  reg.flag("disable_l3", c.loss.disable_l3, "drop the cardinality loss");
  reg.option("layers", c.layers, "propagation layers K");
  reg.option("pct_low", c.pct_low, "negative-edge percentile");
  reg.option("pct_high", c.pct_high, "positive-edge percentile");
  reg.flag("zero_self_walks", c.zero_self_walks, "drop closed walks from the neighbourhoods");
  reg.option("setting", c.setting, "override the manifest setting");
  reg.option("word_vectors", c.word_vectors, "embed labels from a word-vector text file");
}

void add_common(CLI::App* cmd, Common& common, bool needs_manifest, bool needs_out) {
  auto* m = cmd->add_option("--manifest", common.manifest, "manifest.json");
  if (needs_manifest) m->required();
  auto* o = cmd->add_option("--out", common.out, "output directory");
  if (needs_out) o->required();
  cmd->add_option("--config", common.config, "flat JSON config; flags win");
}

struct Loaded {
  Manifest manifest;
  FeatureMatrix train;
  SupervisionConfig supervision;
};

Loaded load_training_inputs(const Common& common, const RunConfig& c, std::ostream& err) {
  Loaded d;
  d.manifest = load_manifest(common.manifest);
  const std::size_t L = d.manifest.labels.size();
  d.train = load_features(d.manifest.files.train_features, L);
  d.supervision = d.manifest.supervision;
  if (!c.setting.empty()) d.supervision.setting = parse_setting(c.setting);
  d.supervision.validate(L, d.train.samples());
  d.supervision = resolve_supervision(d.supervision, &err);
  return d;
}

SignedLabelGraph build_graph(const Manifest& m, const std::string& word_vectors, PercentilePair pair) {
  LabelEmbeddings emb;
  if (!word_vectors.empty()) {
    emb = embed_labels(m.labels, load_word_vectors(word_vectors));
  } else {
    if (!m.files.embeddings) throw ValidationError("manifest lists no embeddings and no --word-vectors was given");
    emb = load_embeddings(*m.files.embeddings);
  }
  if (emb.labels() != m.labels.size()) {
    throw ValidationError("embeddings have " + std::to_string(emb.labels()) + " rows, manifest has " +
                          std::to_string(m.labels.size()) + " labels");
  }
  return threshold_graph(similarity_matrix(emb), pair);
}

json loss_json(const LossBreakdown& b) {
  return {{"l1", b.l1},
          {"l2", b.l2},
          {"l3", b.l3},
          {"l4", b.l4},
          {"total", b.total},
          {"l2_active", b.l2_active},
          {"l3_active", b.l3_active},
          {"l4_active", b.l4_active}};
}

void warn_ablation(const LossConfig& loss, const SupervisionConfig& sup, std::ostream& err) {
  if (loss.disable_l2 && loss.disable_l3) {
    err << "warning: l2 and l3 are disabled; only "
        << (sup.annotations.empty() ? "l1 remains" : "l1 and l4 remain") << " in the objective\n";
  }
}

struct EvalRows {
  MetricsReport model;
  MetricsReport baseline;
};

EvalRows evaluate(const Manifest& m, const ModelParams& params, const BalancedNeighborhoods& nbhd) {
  if (!m.files.test_features) throw ValidationError("manifest lists no test_features");
  if (!m.files.test_labels) throw ValidationError("manifest lists no test_labels");
  const FeatureMatrix test = load_features(*m.files.test_features, m.labels.size());
  const LabelMatrix truth = load_label_matrix(*m.files.test_labels);
  if (truth.rows() != test.samples() || truth.cols() != test.labels()) {
    throw ValidationError("test labels and test features disagree in shape");
  }
  EvalRows rows;
  rows.model = compute_all(truth, predict(forward(init_hidden(test), params, nbhd)));
  rows.baseline = compute_all(truth, baseline_0shot(test));
  return rows;
}

// ---- graph ----------------------------------------------------------------

int cmd_graph(const Common& common, const RunConfig& c, std::ostream& out) {
  const Manifest m = load_manifest(common.manifest);
  const SignedLabelGraph g = build_graph(m, c.word_vectors, c.percentiles());
  make_dir(common.out);
  std::ostringstream edges;
  write_edge_list(g, edges);
  write_text(fs::path(common.out) / "graph.txt", edges.str());
  json summary = {{"labels", g.labels()},
                  {"positive_edges", g.positive_edges()},
                  {"negative_edges", g.negative_edges()},
                  {"delta_pos", g.delta_pos},
                  {"delta_neg", g.delta_neg},
                  {"pct_low", c.pct_low},
                  {"pct_high", c.pct_high}};
  write_text(fs::path(common.out) / "graph.json", summary.dump(2) + "\n");
  out << "positive edges " << g.positive_edges() << ", negative edges " << g.negative_edges() << ", delta+ "
      << g.delta_pos << ", delta- " << g.delta_neg << "\n";
  return 0;
}

// ---- train ----------------------------------------------------------------

int cmd_train(const Common& common, const RunConfig& c, const std::string& resume_path, std::ostream& out,
              std::ostream& err) {
  c.train.validate();
  c.loss.validate();
  const Loaded d = load_training_inputs(common, c, err);
  warn_ablation(c.loss, d.supervision, err);
  const SignedLabelGraph g = build_graph(d.manifest, c.word_vectors, c.percentiles());
  const BalancedNeighborhoods nbhd = balanced_neighborhoods(g, c.layers, {c.zero_self_walks});
  const Objective objective(d.train, nbhd, c.loss, d.supervision);

  std::optional<Checkpoint> resume;
  if (!resume_path.empty()) {
    resume = load_checkpoint(resume_path);
    if (resume->params.layers != c.layers || resume->params.labels != g.labels()) {
      throw ValidationError("checkpoint " + resume_path + " does not match the configured K and L");
    }
  }
  const TrainResult r = train(objective, c.train, resume ? &*resume : nullptr, &err);

  make_dir(common.out);
  const fs::path dir(common.out);
  Checkpoint ck{r.params, r.optimizer, r.epochs_completed, c.percentiles(), c.zero_self_walks};
  save_checkpoint(ck, dir / "checkpoint.bin");
  save_params(r.params, dir / "params.bin");

  json history = {{"config", to_json(c)},
                  {"setting", to_string(d.supervision.setting)},
                  {"kappa", d.supervision.kappa ? json(*d.supervision.kappa) : json(nullptr)},
                  {"epochs", json::array()}};
  json timing = {{"epochs", json::array()}};
  double total_seconds = 0.0;
  for (const EpochRecord& rec : r.history) {
    history["epochs"].push_back(
        {{"epoch", rec.epoch}, {"learning_rate", rec.learning_rate}, {"loss", loss_json(rec.loss)}});
    timing["epochs"].push_back({{"epoch", rec.epoch}, {"seconds", rec.seconds}});
    total_seconds += rec.seconds;
  }
  timing["total_seconds"] = total_seconds;
  write_text(dir / "history.json", history.dump(2) + "\n");
  write_text(dir / "timing.json", timing.dump(2) + "\n");
  out << "trained " << r.epochs_completed << " epochs; checkpoint written to " << (dir / "checkpoint.bin").string()
      << "\n";
  return 0;
}

// ---- eval -----------------------------------------------------------------

int cmd_eval(const Common& common, const RunConfig& c, const std::string& checkpoint_path, std::ostream& out) {
  const Manifest m = load_manifest(common.manifest);
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  if (ck.params.labels != m.labels.size()) {
    throw ValidationError("checkpoint has " + std::to_string(ck.params.labels) + " labels, manifest has " +
                          std::to_string(m.labels.size()));
  }
  const SignedLabelGraph g = build_graph(m, c.word_vectors, ck.percentiles);
  const BalancedNeighborhoods nbhd = balanced_neighborhoods(g, ck.params.layers, {ck.zero_self_walks});
  const EvalRows rows = evaluate(m, ck.params, nbhd);

  json report = {{"samples", rows.model.samples}, {"bncl", to_json(rows.model)}, {"0shot", to_json(rows.baseline)}};
  const std::string table = format_table({{"BNCL", rows.model}, {"0Shot", rows.baseline}});
  if (!common.out.empty()) {
    make_dir(common.out);
    write_text(fs::path(common.out) / "report.json", report.dump(2) + "\n");
    write_text(fs::path(common.out) / "report.txt", table);
  }
  out << table;
  return 0;
}

// ---- gradcheck ------------------------------------------------------------

int cmd_gradcheck(const Common& common, const RunConfig& c, std::size_t entries, bool break_sign, std::ostream& out,
                  std::ostream& err) {
  c.loss.validate();
  const Loaded d = load_training_inputs(common, c, err);
  const SignedLabelGraph g = build_graph(d.manifest, c.word_vectors, c.percentiles());
  const BalancedNeighborhoods nbhd = balanced_neighborhoods(g, c.layers, {c.zero_self_walks});
  const Objective objective(d.train, nbhd, c.loss, d.supervision);
  const ModelParams params = init_params(g.labels(), c.layers, c.train.seed, c.train.init_scale);
  std::vector<std::size_t> batch(std::min(d.train.samples(), c.train.batch_size));
  std::iota(batch.begin(), batch.end(), std::size_t{0});

  GradCheckOptions opts;
  opts.entries = entries;
  opts.seed = c.train.seed;
  opts.flip_sign = break_sign;
  const GradCheckReport r = grad_check(objective, params, batch, opts);
  json report = {{"max_rel_error", r.max_rel_error},   {"mean_rel_error", r.mean_rel_error},
                 {"sampled_entries", r.compared},      {"masked_entries", r.masked_entries},
                 {"kink_skipped", r.kink_skipped},     {"bound", r.bound},
                 {"batch_size", batch.size()},         {"passed", r.passed}};
  if (!common.out.empty()) {
    make_dir(common.out);
    write_text(fs::path(common.out) / "gradcheck.json", report.dump(2) + "\n");
  }
  out << "max relative error " << r.max_rel_error << " over " << r.compared << " sampled entries (bound " << r.bound
      << ", " << r.kink_skipped << " skipped at kinks): " << (r.passed ? "PASS" : "FAIL") << "\n";
  return r.passed ? 0 : 1;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  SynthConfig config;
  std::string setting = "annotation-free";
  std::size_t quantize_groups = 0;
};

int cmd_synth(const Common& common, const SynthArgs& a, std::ostream& out) {
  const Setting setting = parse_setting(a.setting);
  const SynthDataset data = generate(a.config);
  const fs::path manifest = write_dataset(data, common.out, setting, a.quantize_groups);
  out << "wrote " << manifest.string() << " (L " << a.config.labels << ", train " << a.config.train << ", test "
      << a.config.test << ", kappa " << data.kappa << ")\n";
  return 0;
}

// ---- ablate ---------------------------------------------------------------

int cmd_ablate(const Common& common, const RunConfig& base, std::ostream& out, std::ostream& err) {
  base.train.validate();
  base.loss.validate();
  const Loaded d = load_training_inputs(common, base, err);
  const SignedLabelGraph g = build_graph(d.manifest, base.word_vectors, base.percentiles());
  const BalancedNeighborhoods nbhd = balanced_neighborhoods(g, base.layers, {base.zero_self_walks});

  struct Variant {
    const char* name;
    bool no_l2, no_l3;
  };
  const Variant variants[] = {
      {"full", false, false}, {"no-l2", true, false}, {"no-l3", false, true}, {"no-l2-l3", true, true}};
  json report = {{"config", to_json(base)}, {"variants", json::array()}};
  std::vector<std::pair<std::string, MetricsReport>> table;
  std::optional<MetricsReport> baseline;
  for (const Variant& v : variants) {
    LossConfig loss = base.loss;
    loss.disable_l2 = v.no_l2;
    loss.disable_l3 = v.no_l3;
    err << "ablation variant " << v.name << "\n";
    warn_ablation(loss, d.supervision, err);
    const Objective objective(d.train, nbhd, loss, d.supervision);
    const TrainResult r = train(objective, base.train);
    const EvalRows rows = evaluate(d.manifest, r.params, nbhd);
    baseline = rows.baseline;
    report["variants"].push_back({{"name", v.name},
                                  {"disable_l2", v.no_l2},
                                  {"disable_l3", v.no_l3},
                                  {"final_loss", loss_json(r.history.empty() ? LossBreakdown{} : r.history.back().loss)},
                                  {"metrics", to_json(rows.model)}});
    table.emplace_back(v.name, rows.model);
  }
  report["0shot"] = to_json(*baseline);
  table.emplace_back("0Shot", *baseline);
  const std::string text = format_table(table);
  make_dir(common.out);
  write_text(fs::path(common.out) / "ablation.json", report.dump(2) + "\n");
  write_text(fs::path(common.out) / "ablation.txt", text);
  out << text;
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signed label-graph propagation for weakly supervised multi-label classification", "bncl"};
  app.require_subcommand(1);

  Common common;
  RunConfig cfg;
  std::string resume, checkpoint;
  std::size_t entries = 100;
  bool break_sign = false;
  SynthArgs synth;

  auto* graph = app.add_subcommand("graph", "build the signed label graph and write an edge list");
  auto* train_cmd = app.add_subcommand("train", "train propagation weights");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint against the zero-shot baseline");
  auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic gradients with finite differences");
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset");
  auto* ablate = app.add_subcommand("ablate", "train and evaluate with l2/l3 removed in turn");

  add_common(graph, common, true, true);
  add_common(train_cmd, common, true, true);
  add_common(eval, common, true, false);
  add_common(gradcheck, common, true, false);
  add_common(ablate, common, true, true);

  std::vector<Registry> registries;
  registries.reserve(5);
  for (CLI::App* cmd : {graph, train_cmd, eval, gradcheck, ablate}) {
    registries.emplace_back(cmd);
    register_run_options(registries.back(), cfg);
  }
  train_cmd->add_option("--resume", resume, "continue from a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "checkpoint.bin from train")->required();
  gradcheck->add_option("--entries", entries, "weight entries to compare")->capture_default_str();
  gradcheck->add_flag("--break-gradient-sign", break_sign)->group("");

  synth_cmd->add_option("--out", common.out, "output directory")->required();
  synth_cmd->add_option("--config", common.config, "flat JSON config; flags win");
  Registry synth_reg(synth_cmd);
  SynthConfig& sc = synth.config;
  synth_reg.option("labels", sc.labels, "label count L");
  synth_reg.option("train", sc.train, "training samples");
  synth_reg.option("test", sc.test, "test samples");
  synth_reg.option("clusters", sc.clusters, "label clusters");
  synth_reg.option("rho_pos", sc.rho_pos, "intra-cluster inclusion weight");
  synth_reg.option("rho_neg", sc.rho_neg, "cross-cluster exclusion");
  synth_reg.option("noise", sc.noise, "fraction of corrupted feature entries");
  synth_reg.option("neutral", sc.neutral, "neutral mass of clean entries");
  synth_reg.option("kappa", sc.kappa, "target mean label-set size");
  synth_reg.option("embedding_dim", sc.embedding_dim, "label embedding dimension");
  synth_reg.option("embedding_jitter", sc.embedding_jitter, "embedding noise around cluster centroids");
  synth_reg.option("annotated", sc.annotated, "annotated training samples (0 means L)");
  synth_reg.option("seed", sc.seed, "seed (falls back to BNCL_SEED)");
  synth_reg.option("setting", synth.setting, "setting recorded in the manifest");
  synth_reg.option("quantize_groups", synth.quantize_groups, "replace lambdas by frequency-group means");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : static_cast<int>(ErrorKind::kValidation);
    }

    if (*synth_cmd) {
      finish_config(synth_reg, common);
      seed_fallback(synth_reg, common, sc.seed);
      return cmd_synth(common, synth, out);
    }
    CLI::App* chosen = app.get_subcommands().front();
    const std::size_t idx = chosen == graph ? 0 : chosen == train_cmd ? 1 : chosen == eval ? 2 : chosen == gradcheck ? 3 : 4;
    finish_config(registries[idx], common);
    seed_fallback(registries[idx], common, cfg.train.seed);

    if (chosen == graph) return cmd_graph(common, cfg, out);
    if (chosen == train_cmd) return cmd_train(common, cfg, resume, out, err);
    if (chosen == eval) return cmd_eval(common, cfg, checkpoint, out);
    if (chosen == gradcheck) return cmd_gradcheck(common, cfg, entries, break_sign, out, err);
    return cmd_ablate(common, cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kValidation);
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bncl::cli
