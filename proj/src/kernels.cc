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

#include "fairmt/kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fairmt::kernels {
namespace {

// Per-row bodies. The serial and OpenMP drivers below call exactly these, so
// both paths share one arithmetic order.

double RowNorm(const RowMatrix& reps, int i, NormGuard guard) {
  double sq = 0.0;
  for (int h = 0; h < reps.cols(); ++h) sq += reps(i, h) * reps(i, h);
  const double norm = std::sqrt(sq);
  if (guard == NormGuard::kStrict) {
    if (!(norm > 0.0)) {
      throw std::domain_error("zero-norm representation at row " +
                              std::to_string(i));
    }
    return norm;
  }
  return std::max(norm, kNormEpsilon);
}

void CosineRow(const RowMatrix& reps, const Vector& norms, int i,
               RowMatrix& out) {
  const int n = static_cast<int>(reps.rows());
  for (int k = 0; k < n; ++k) {
    double dot = 0.0;
    for (int h = 0; h < reps.cols(); ++h) dot += reps(i, h) * reps(k, h);
    out(i, k) = dot / (norms[i] * norms[k]);
  }
}

void ContrastiveRow(const RowMatrix& cosine, const std::vector<int>& pos,
                    double tau, double inv_n, bool with_grad, int i,
                    std::vector<double>& anchor, RowMatrix& dcos) {
  const int n = static_cast<int>(cosine.rows());
  if (pos.empty()) {
    anchor[i] = 0.0;
    return;
  }
  double max_logit = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    if (k != i) max_logit = std::max(max_logit, cosine(i, k) / tau);
  }
  double denom = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k != i) denom += std::exp(cosine(i, k) / tau - max_logit);
  }
  const double log_denom = max_logit + std::log(denom);
  const double count = static_cast<double>(pos.size());
  double term = count * log_denom;
  for (int p : pos) term -= cosine(i, p) / tau;
  anchor[i] = term;

  if (!with_grad) return;
  // dL_i/ds_ik = (|P_i| softmax_ik - [k in P_i]) / tau, scaled by 1/N.
  for (int k = 0; k < n; ++k) {
    dcos(i, k) = k == i ? 0.0
                        : count * std::exp(cosine(i, k) / tau - log_denom) *
                              inv_n / tau;
  }
  for (int p : pos) dcos(i, p) -= inv_n / tau;
}

void CosineBackwardRow(const RowMatrix& reps, const Similarity& sim,
                       const RowMatrix& dcos, int i, RowMatrix& out) {
  const int n = static_cast<int>(reps.rows());
  const int h_dim = static_cast<int>(reps.cols());
  double raw_sq = 0.0;
  for (int h = 0; h < h_dim; ++h) raw_sq += reps(i, h) * reps(i, h);
  // When the norm is floored it is a constant and drops out of the gradient.
  const bool norm_active = std::sqrt(raw_sq) >= sim.norms[i];
  for (int h = 0; h < h_dim; ++h) out(i, h) = 0.0;
  for (int k = 0; k < n; ++k) {
    // cosine(i, k) depends on v_i through anchor i's row and anchor k's row.
    double g = dcos(i, k) + dcos(k, i);
    if (k == i || g == 0.0) continue;
    const double scale = g / (sim.norms[i] * sim.norms[k]);
    const double self =
        norm_active ? g * sim.cosine(i, k) / (sim.norms[i] * sim.norms[i])
                    : 0.0;
    for (int h = 0; h < h_dim; ++h) {
      out(i, h) += scale * reps(k, h) - self * reps(i, h);
    }
  }
}

void SoftmaxRow(const RowMatrix& logits, int i, RowMatrix& out) {
  const double mx = logits.row(i).maxCoeff();
  double sum = 0.0;
  for (int c = 0; c < logits.cols(); ++c) {
    out(i, c) = std::exp(logits(i, c) - mx);
    sum += out(i, c);
  }
  for (int c = 0; c < logits.cols(); ++c) out(i, c) /= sum;
}

void CheckTau(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be > 0");
}

double SumInOrder(const std::vector<double>& terms, double inv_n) {
  double total = 0.0;
  for (double t : terms) total += t;
  return total * inv_n;
}

}  // namespace

Similarity PairwiseCosine(const RowMatrix& reps, NormGuard guard) {
  const int n = static_cast<int>(reps.rows());
  Similarity sim;
  sim.norms.resize(n);
  sim.cosine.resize(n, n);
  // Strict mode may throw; exceptions cannot cross an OpenMP region, so the
  // norms are checked serially first.
  for (int i = 0; i < n; ++i) sim.norms[i] = RowNorm(reps, i, guard);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) CosineRow(reps, sim.norms, i, sim.cosine);
  return sim;
}

ContrastiveTerms Contrastive(const RowMatrix& cosine,
                             const PositiveSets& positives, double tau,
                             bool with_grad) {
  CheckTau(tau);
  const int n = static_cast<int>(cosine.rows());
  const double inv_n = 1.0 / n;
  ContrastiveTerms out;
  out.anchor.assign(n, 0.0);
  if (with_grad) out.dcos = RowMatrix::Zero(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    ContrastiveRow(cosine, positives[i], tau, inv_n, with_grad, i, out.anchor,
                   out.dcos);
  }
  out.loss = SumInOrder(out.anchor, inv_n);
  return out;
}

RowMatrix PairwiseCosineBackward(const RowMatrix& reps, const Similarity& sim,
                                 const RowMatrix& dcos) {
  RowMatrix out(reps.rows(), reps.cols());
  const int n = static_cast<int>(reps.rows());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) CosineBackwardRow(reps, sim, dcos, i, out);
  return out;
}

RowMatrix SoftmaxRows(const RowMatrix& logits) {
  RowMatrix out(logits.rows(), logits.cols());
  const int n = static_cast<int>(logits.rows());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) SoftmaxRow(logits, i, out);
  return out;
}

namespace reference {

Similarity PairwiseCosine(const RowMatrix& reps, NormGuard guard) {
  const int n = static_cast<int>(reps.rows());
  Similarity sim;
  sim.norms.resize(n);
  sim.cosine.resize(n, n);
  for (int i = 0; i < n; ++i) sim.norms[i] = RowNorm(reps, i, guard);
  for (int i = 0; i < n; ++i) CosineRow(reps, sim.norms, i, sim.cosine);
  return sim;
}

ContrastiveTerms Contrastive(const RowMatrix& cosine,
                             const PositiveSets& positives, double tau,
                             bool with_grad) {
  CheckTau(tau);
  const int n = static_cast<int>(cosine.rows());
  const double inv_n = 1.0 / n;
  ContrastiveTerms out;
  out.anchor.assign(n, 0.0);
  if (with_grad) out.dcos = RowMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    ContrastiveRow(cosine, positives[i], tau, inv_n, with_grad, i, out.anchor,
                   out.dcos);
  }
  out.loss = SumInOrder(out.anchor, inv_n);
  return out;
}

RowMatrix PairwiseCosineBackward(const RowMatrix& reps, const Similarity& sim,
                                 const RowMatrix& dcos) {
  RowMatrix out(reps.rows(), reps.cols());
  for (int i = 0; i < reps.rows(); ++i) {
    CosineBackwardRow(reps, sim, dcos, i, out);
  }
  return out;
}

RowMatrix SoftmaxRows(const RowMatrix& logits) {
  RowMatrix out(logits.rows(), logits.cols());
  for (int i = 0; i < logits.rows(); ++i) SoftmaxRow(logits, i, out);
  return out;
}

}  // namespace reference
}  // namespace fairmt::kernels
