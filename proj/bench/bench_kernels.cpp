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

// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare
// thread counts.

#include <bncl/kernels.hpp>
#include <bncl/label_graph.hpp>
#include <bncl/rng.hpp>
#include <bncl/synth.hpp>

#include <benchmark/benchmark.h>

using namespace bncl;

namespace {

struct Problem {
  SynthDataset data;
  BalancedNeighborhoods nbhd;
  SupportMasks masks;
  ModelParams weights;
  HiddenStates start;
};

Problem make_problem(std::size_t labels, std::size_t samples) {
  SynthConfig c;
  c.labels = labels;
  c.clusters = labels / 6;
  c.train = samples;
  c.test = 1;
  Problem p;
  p.data = generate(c);
  p.nbhd = balanced_neighborhoods(threshold_graph(similarity_matrix(p.data.embeddings), {}), 2);
  p.masks = support_masks(p.nbhd);
  p.weights = apply_masks(init_params(labels, 2, 1, 0.3), p.masks);
  p.start = init_hidden(p.data.train_features);
  return p;
}

template <void (*Forward)(const ModelParams&, HiddenStates&)>
void BM_forward(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    HiddenStates s = p.start;
    Forward(p.weights, s);
    benchmark::DoNotOptimize(s.entailment.back().values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

template <void (*Forward)(const ModelParams&, HiddenStates&),
          ModelParams (*Backward)(const ModelParams&, const SupportMasks&, const HiddenStates&, const Matrix<double>&,
                                  const Matrix<double>&)>
void BM_backward(benchmark::State& state) {
  const Problem p = make_problem(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  HiddenStates s = p.start;
  Forward(p.weights, s);
  Matrix<double> ge(s.samples(), p.weights.labels), gc(s.samples(), p.weights.labels);
  Rng rng(3);
  for (double& x : ge.values()) x = rng.normal();
  for (double& x : gc.values()) x = rng.normal();
  for (auto _ : state) {
    ModelParams g = Backward(p.weights, p.masks, s, ge, gc);
    benchmark::DoNotOptimize(g.blocks.front().values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

template <Matrix<double> (*Cosine)(const Matrix<double>&)>
void BM_cosine(benchmark::State& state) {
  const auto L = static_cast<std::size_t>(state.range(0));
  Matrix<double> v(L, 300);
  Rng rng(5);
  for (double& x : v.values()) x = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(Cosine(v).values().data());
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({24, 128})->Args({24, 2000})->Args({96, 2000})->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(BM_forward<reference::forward_layers>)->Apply(shapes);
BENCHMARK(BM_forward<kernels::forward_layers>)->Apply(shapes);
BENCHMARK(BM_backward<reference::forward_layers, reference::backward_layers>)->Apply(shapes);
BENCHMARK(BM_backward<kernels::forward_layers, kernels::backward_layers>)->Apply(shapes);
BENCHMARK(BM_cosine<reference::cosine_similarity>)->Arg(90)->Arg(500)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_cosine<kernels::cosine_similarity>)->Arg(90)->Arg(500)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
