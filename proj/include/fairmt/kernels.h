// Copyright 2026 The fairmt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRMT_KERNELS_H_
#define FAIRMT_KERNELS_H_

// Batch-level numeric kernels shared by the encoder and the contrastive
// losses. Every kernel has an OpenMP version in `fairmt::kernels` and a plain
// serial version in `fairmt::kernels::reference`. Both perform the same
// floating-point operations in the same order per output element, so their
// results are bit-identical; the parallel loops only distribute independent
// rows. Reductions across rows are always done serially in index order.

#include <vector>

#include <Eigen/Dense>

namespace fairmt {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Index sets of in-batch positives, one per anchor.
using PositiveSets = std::vector<std::vector<int>>;

namespace kernels {

inline constexpr double kNormEpsilon = 1e-8;

enum class NormGuard {
  kStrict,   // zero-norm rows throw std::domain_error
  kEpsilon,  // norms are floored at kNormEpsilon
};

struct Similarity {
  RowMatrix cosine;  // N x N, diagonal is sim(v_i, v_i)
  Vector norms;      // guarded norms used in the division
};

struct ContrastiveTerms {
  double loss = 0.0;           // (1/N) * sum of per-anchor terms
  std::vector<double> anchor;  // per-anchor terms L_i
  RowMatrix dcos;              // d loss / d cosine(i, k) from anchor i's row
};

Similarity PairwiseCosine(const RowMatrix& reps, NormGuard guard);

// Supervised contrastive loss over a precomputed similarity matrix:
//   L_i = -sum_{p in P_i} log( exp(s_ip/tau) / sum_{k != i} exp(s_ik/tau) )
// with the denominator evaluated by log-sum-exp. Anchors with an empty
// positive set contribute zero. `dcos` is filled only when `with_grad`.
ContrastiveTerms Contrastive(const RowMatrix& cosine,
                             const PositiveSets& positives, double tau,
                             bool with_grad);

// Back-propagates d loss / d cosine(i, k) to the representation rows.
RowMatrix PairwiseCosineBackward(const RowMatrix& reps, const Similarity& sim,
                                 const RowMatrix& dcos);

// Row-wise softmax of `logits` (max-subtracted).
RowMatrix SoftmaxRows(const RowMatrix& logits);

namespace reference {

Similarity PairwiseCosine(const RowMatrix& reps, NormGuard guard);
ContrastiveTerms Contrastive(const RowMatrix& cosine,
                             const PositiveSets& positives, double tau,
                             bool with_grad);
RowMatrix PairwiseCosineBackward(const RowMatrix& reps, const Similarity& sim,
                                 const RowMatrix& dcos);
RowMatrix SoftmaxRows(const RowMatrix& logits);

}  // namespace reference
}  // namespace kernels
}  // namespace fairmt

#endif  // FAIRMT_KERNELS_H_
