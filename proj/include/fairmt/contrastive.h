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

#ifndef FAIRMT_CONTRASTIVE_H_
#define FAIRMT_CONTRASTIVE_H_

// Training objective: a language-fusion contrastive term (same label,
// different language positives), a text-debiasing contrastive term (same
// label, different sensitive value positives) and a cross-entropy term,
// mixed as  alpha * lf + beta * td + (1 - alpha - beta) * ce.

#include <span>
#include <string>
#include <vector>

#include "fairmt/encoder.h"
#include "fairmt/kernels.h"
#include "fairmt/types.h"

namespace fairmt {

struct BatchView {
  RowMatrix reps;  // N x H, one representation per row
  std::vector<int> labels;
  std::vector<std::string> langs;
  std::vector<std::string> attr_values;

  int size() const { return static_cast<int>(reps.rows()); }
  // Throws std::invalid_argument on ragged fields, N < 2 or non-finite reps.
  void Validate() const;
};

// u.v / (|u| |v|). Throws std::invalid_argument on length mismatch and
// std::domain_error when either norm is zero.
double CosineSimilarity(std::span<const double> u, std::span<const double> v);

// {t : y_t == y_i, l_t != l_i, t != i}
std::vector<int> PositiveSetLf(int i, const BatchView& batch);
// {q : y_q == y_i, s_q != s_i, q != i}
std::vector<int> PositiveSetTd(int i, const BatchView& batch);

PositiveSets PositiveSetsLf(const BatchView& batch);
PositiveSets PositiveSetsTd(const BatchView& batch);

// Batch contrastive loss (1/N) sum_i L_i with strict cosine similarity.
// Throws std::invalid_argument when tau <= 0.
double ContrastiveLoss(const BatchView& batch, const PositiveSets& positives,
                       double tau);

// softmax(rep . W^T + b).
Vector ClassifierForward(const Vector& rep, const RowMatrix& weight,
                         const Vector& bias);

inline constexpr double kProbabilityFloor = 1e-12;

// -(1/K) log P[gold], with K = probs.size(). P[gold] is floored at
// kProbabilityFloor; `clamped` reports when that happened.
double CrossEntropy(const Vector& probs, int gold, bool* clamped = nullptr);

double TotalLoss(double l_lf, double l_td, double l_ce,
                 const LossWeights& weights);

struct LossBreakdown {
  double l_lf = 0.0;
  double l_td = 0.0;
  double l_ce = 0.0;
  double total = 0.0;
  Vector gradient;  // ParamBlocks::Flatten layout
};

// One training example with tokens already mapped to vocabulary rows.
struct BatchExample {
  std::vector<int> token_ids;
  int label = 0;
  std::string lang;
  std::string attr_value;
};

BatchExample MakeBatchExample(const Sample& sample, const Vocab& vocab,
                              const std::string& attribute);

// Loss values and the exact gradient of the total w.r.t. every trainable
// tensor. `guard` selects how zero-norm representations are handled inside
// the cosine similarity; training uses kEpsilon. Identity-mode encoders
// report a zero gradient for the fixed projection.
LossBreakdown LossAndGradient(
    std::span<const BatchExample> batch, const EncoderParams& params,
    const LossWeights& weights,
    kernels::NormGuard guard = kernels::NormGuard::kEpsilon);

LossBreakdown LossAndGradient(
    std::span<const Sample> batch, const EncoderParams& params,
    const LossWeights& weights, const std::string& attribute,
    kernels::NormGuard guard = kernels::NormGuard::kEpsilon);

}  // namespace fairmt

#endif  // FAIRMT_CONTRASTIVE_H_
