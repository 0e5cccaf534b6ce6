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

#ifndef BNCL_KERNELS_HPP_
#define BNCL_KERNELS_HPP_

// Hot loops of the library. Each kernel exists twice with identical
// signatures: bncl::kernels holds the OpenMP versions used by the library,
// bncl::reference the plain serial loops kept for testing and benchmarking.
// Both produce bitwise-identical results; the parallel versions only split
// work over independent output rows, never over a reduction.

#include <bncl/matrix.hpp>
#include <bncl/propagation.hpp>

#include <cstdint>

namespace bncl {

struct ConfusionCounts {
  std::vector<std::int64_t> tp, fp, fn, tn;
};

#define BNCL_KERNEL_DECLS                                                                                  \
  /* next(u,v) = sum_w A+(w,u) prev_same(w,v) + A-(w,u) prev_flip(w,v) */                                 \
  void signed_walk_step(const BinaryMatrix& pos_adj, const BinaryMatrix& neg_adj,                          \
                        const Matrix<std::int64_t>& prev_pos, const Matrix<std::int64_t>& prev_neg,        \
                        Matrix<std::int64_t>& next_pos, Matrix<std::int64_t>& next_neg);                   \
  Matrix<double> cosine_similarity(const Matrix<double>& vectors);                                         \
  /* `masked` must already have apply_masks() applied. */                                                  \
  void forward_layers(const ModelParams& masked, HiddenStates& states);                                    \
  ModelParams backward_layers(const ModelParams& masked, const SupportMasks& masks,                        \
                              const HiddenStates& states, const Matrix<double>& grad_entailment,           \
                              const Matrix<double>& grad_contradiction);                                   \
  ConfusionCounts confusion_counts(const BinaryMatrix& truth, const BinaryMatrix& pred);

namespace kernels {
BNCL_KERNEL_DECLS
}  // namespace kernels

namespace reference {
BNCL_KERNEL_DECLS
}  // namespace reference

#undef BNCL_KERNEL_DECLS

}  // namespace bncl

#endif  // BNCL_KERNELS_HPP_
