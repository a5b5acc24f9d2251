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

#include "fairmt/contrastive.h"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace fairmt {

void BatchView::Validate() const {
  const auto n = static_cast<std::size_t>(reps.rows());
  if (labels.size() != n || langs.size() != n || attr_values.size() != n) {
    throw std::invalid_argument("batch fields have different lengths");
  }
  if (n < 2) throw std::invalid_argument("batch needs at least 2 samples");
  if (!reps.allFinite()) {
    throw std::invalid_argument("batch representations must be finite");
  }
}

double CosineSimilarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine similarity: length mismatch");
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (!(uu > 0.0) || !(vv > 0.0)) {
    throw std::domain_error("cosine similarity of a zero vector");
  }
  return dot / (std::sqrt(uu) * std::sqrt(vv));
}

namespace {

template <typename SameGroup>
std::vector<int> PositiveSet(int i, const BatchView& batch, SameGroup same) {
  if (i < 0 || i >= static_cast<int>(batch.labels.size())) {
    throw std::out_of_range("anchor index outside batch");
  }
  std::vector<int> out;
  for (int t = 0; t < static_cast<int>(batch.labels.size()); ++t) {
    if (t != i && batch.labels[t] == batch.labels[i] && !same(t, i)) {
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace

std::vector<int> PositiveSetLf(int i, const BatchView& batch) {
  return PositiveSet(
      i, batch, [&](int a, int b) { return batch.langs[a] == batch.langs[b]; });
}

std::vector<int> PositiveSetTd(int i, const BatchView& batch) {
  return PositiveSet(i, batch, [&](int a, int b) {
    return batch.attr_values[a] == batch.attr_values[b];
  });
}

PositiveSets PositiveSetsLf(const BatchView& batch) {
  PositiveSets sets(batch.labels.size());
  for (int i = 0; i < static_cast<int>(sets.size()); ++i) {
    sets[i] = PositiveSetLf(i, batch);
  }
  return sets;
}

PositiveSets PositiveSetsTd(const BatchView& batch) {
  PositiveSets sets(batch.labels.size());
  for (int i = 0; i < static_cast<int>(sets.size()); ++i) {
    sets[i] = PositiveSetTd(i, batch);
  }
  return sets;
}

double ContrastiveLoss(const BatchView& batch, const PositiveSets& positives,
                       double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be > 0");
  batch.Validate();
  if (positives.size() != batch.labels.size()) {
    throw std::invalid_argument("one positive set per anchor required");
  }
  const auto sim =
      kernels::PairwiseCosine(batch.reps, kernels::NormGuard::kStrict);
  return kernels::Contrastive(sim.cosine, positives, tau, false).loss;
}

Vector ClassifierForward(const Vector& rep, const RowMatrix& weight,
                         const Vector& bias) {
  if (weight.cols() != rep.size() || weight.rows() != bias.size()) {
    throw std::invalid_argument("classifier shapes do not conform");
  }
  RowMatrix logits = (weight * rep + bias).transpose();
  return kernels::reference::SoftmaxRows(logits).row(0).transpose();
}

double CrossEntropy(const Vector& probs, int gold, bool* clamped) {
  if (gold < 0 || gold >= probs.size()) {
    throw std::out_of_range("gold class outside probability vector");
  }
  double p = probs[gold];
  const bool floor_hit = p < kProbabilityFloor;
  if (floor_hit) {
    std::cerr << "warning: probability of gold class " << gold
              << " clamped to " << kProbabilityFloor << "\n";
    p = kProbabilityFloor;
  }
  if (clamped != nullptr) *clamped = floor_hit;
  return -std::log(p) / static_cast<double>(probs.size());
}

double TotalLoss(double l_lf, double l_td, double l_ce,
                 const LossWeights& weights) {
  return weights.alpha * l_lf + weights.beta * l_td +
         weights.CeWeight() * l_ce;
}

BatchExample MakeBatchExample(const Sample& sample, const Vocab& vocab,
                              const std::string& attribute) {
  BatchExample ex;
  ex.token_ids = vocab.Ids(sample.tokens);
  ex.label = sample.label;
  ex.lang = sample.lang;
  auto it = sample.attrs.find(attribute);
  if (it != sample.attrs.end()) ex.attr_value = it->second;
  return ex;
}

LossBreakdown LossAndGradient(std::span<const BatchExample> batch,
                              const EncoderParams& params,
                              const LossWeights& weights,
                              kernels::NormGuard guard) {
  weights.Validate();
  const int n = static_cast<int>(batch.size());
  if (n < 2) throw std::invalid_argument("batch needs at least 2 samples");
  const int k_classes = params.dims.num_classes;

  std::vector<std::vector<int>> ids(n);
  BatchView view;
  for (int i = 0; i < n; ++i) {
    ids[i] = batch[i].token_ids;
    view.labels.push_back(batch[i].label);
    view.langs.push_back(batch[i].lang);
    view.attr_values.push_back(batch[i].attr_value);
    if (batch[i].label < 0 || batch[i].label >= k_classes) {
      throw std::invalid_argument("label outside classifier range");
    }
  }
  const EncoderCache cache = EncodeBatch(ids, params);
  view.reps = cache.reps;

  LossBreakdown out;
  RowMatrix dreps = RowMatrix::Zero(n, params.dims.hidden_dim);

  // Contrastive values are always reported; their gradients are only formed
  // when the term carries weight.
  const kernels::Similarity sim = kernels::PairwiseCosine(view.reps, guard);
  auto contrastive = [&](const PositiveSets& sets, double tau, double weight,
                         double& value) {
    const bool with_grad = weight > 0.0;
    const auto terms = kernels::Contrastive(sim.cosine, sets, tau, with_grad);
    value = terms.loss;
    if (with_grad) {
      dreps += weight *
               kernels::PairwiseCosineBackward(view.reps, sim, terms.dcos);
    }
  };
  contrastive(PositiveSetsLf(view), weights.TauLf(), weights.alpha, out.l_lf);
  contrastive(PositiveSetsTd(view), weights.TauTd(), weights.beta, out.l_td);

  const RowMatrix probs =
      kernels::SoftmaxRows(ClassifierLogits(view.reps, params));
  double ce_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    ce_sum += CrossEntropy(probs.row(i).transpose(), view.labels[i]);
  }
  out.l_ce = ce_sum / n;
  out.total = TotalLoss(out.l_lf, out.l_td, out.l_ce, weights);

  // d total / d logits = ce_weight * (P - onehot) / (N K).
  RowMatrix dlogits = probs;
  for (int i = 0; i < n; ++i) dlogits(i, view.labels[i]) -= 1.0;
  dlogits *= weights.CeWeight() / (static_cast<double>(n) * k_classes);

  ParamBlocks grad = params.blocks.ZerosLike();
  grad.classifier_weight = dlogits.transpose() * view.reps;
  grad.classifier_bias = dlogits.colwise().sum().transpose();
  dreps += dlogits * params.blocks.classifier_weight;

  EncodeBatchBackward(ids, params, cache, dreps, grad);
  out.gradient = grad.Flatten();
  return out;
}

LossBreakdown LossAndGradient(std::span<const Sample> batch,
                              const EncoderParams& params,
                              const LossWeights& weights,
                              const std::string& attribute,
                              kernels::NormGuard guard) {
  std::vector<BatchExample> examples;
  examples.reserve(batch.size());
  for (const auto& s : batch) {
    examples.push_back(MakeBatchExample(s, params.vocab, attribute));
  }
  return LossAndGradient(examples, params, weights, guard);
}

}  // namespace fairmt
