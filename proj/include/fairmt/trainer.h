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

#ifndef FAIRMT_TRAINER_H_
#define FAIRMT_TRAINER_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairmt/contrastive.h"
#include "fairmt/encoder.h"
#include "fairmt/metrics.h"
#include "fairmt/types.h"

namespace fairmt {

enum class TrainMode { kMerge, kIndividual };
enum class Sampler { kStratified, kUniform };

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 1e-2;
  LossWeights weights;
  TrainMode mode = TrainMode::kMerge;
  std::string attribute = "gender";
  std::uint64_t seed = 1;
  Sampler sampler = Sampler::kStratified;
  EncoderDims dims;  // num_classes is taken from the dataset
  int positive = 1;

  // Throws std::invalid_argument when epochs < 1, batch_size < 2, the
  // learning rate is not positive, or the loss weights are invalid.
  void Validate() const;
};

// Splits the samples into batches of indices. The uniform sampler is a seeded
// shuffle. The stratified sampler spreads every (label, language, attribute
// value) stratum evenly over the sequence, so each batch holds roughly the
// dataset's mix of strata. A trailing batch of one sample is merged into the
// previous batch. When batch_size exceeds the dataset, one batch is returned
// and a warning is printed.
std::vector<std::vector<int>> MakeBatches(const Dataset& dataset,
                                          int batch_size, Sampler sampler,
                                          std::uint64_t seed,
                                          const std::string& attribute);

struct AdamState {
  Vector m;
  Vector v;
  std::int64_t step = 0;

  static AdamState Zeros(Eigen::Index size);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// One bias-corrected Adam update in place. Throws std::runtime_error on a
// non-finite gradient and std::invalid_argument on a shape mismatch.
void AdamStep(Vector& params, const Vector& gradient, AdamState& state,
              double learning_rate);

struct EpochStats {
  double l_lf = 0.0;
  double l_td = 0.0;
  double l_ce = 0.0;
  double total = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  // Evaluation report per held-out split name, filled by RunExperiment.
  std::map<std::string, MetricReport> final_reports;
};

struct TrainedModel {
  std::string language;  // empty for a merged model
  EncoderParams params;
  TrainHistory history;
};

struct TrainResult {
  TrainMode mode = TrainMode::kMerge;
  std::vector<TrainedModel> models;  // one, or one per language
};

// Trains a single model on all of `train`. Throws std::runtime_error with
// epoch/batch coordinates if the loss turns non-finite.
TrainedModel TrainModel(const Dataset& train, const TrainConfig& config);

// Merge mode trains one model on every language; individual mode trains one
// model per language on that language's samples only.
TrainResult Train(const Dataset& train, const TrainConfig& config);

// One record per sample: pred = argmax P, score = P[positive]. Attributes
// and language ride along for grouping and are never encoded.
std::vector<PredictionRecord> Evaluate(const EncoderParams& params,
                                       const Dataset& dataset, int positive);

// Routes each sample to its language's model in individual mode.
std::vector<PredictionRecord> Evaluate(const TrainResult& result,
                                       const Dataset& dataset, int positive);

// Trains, then evaluates on each held-out split and stores the reports in
// the history of every trained model.
TrainResult RunExperiment(const Dataset& train,
                          const std::map<std::string, Dataset>& heldout,
                          const TrainConfig& config);

struct SearchTrial {
  int index = 0;
  LossWeights weights;
  MetricReport report;
  bool feasible = false;
};

struct SearchResult {
  TrainConfig best;
  int best_index = 0;
  // Set when no trial met the macro-F floor and the least biased trial was
  // picked regardless.
  bool fallback = false;
  MetricReport baseline;  // alpha = beta = 0
  std::vector<SearchTrial> trials;
};

// Random search over (alpha, beta) uniform on {alpha, beta >= 0,
// alpha + beta <= 0.9} and tau log-uniform on [0.03, 1]. Picks the trial with
// the lowest med_avg on `heldout` among trials whose average macro-F is
// within `macro_f_floor` of the alpha = beta = 0 baseline.
SearchResult RandomSearch(const Dataset& train, const Dataset& heldout,
                          const TrainConfig& base, int trials,
                          std::uint64_t seed, double macro_f_floor = 0.05);

inline constexpr double kSearchSimplexCap = 0.9;
inline constexpr double kSearchTauMin = 0.03;
inline constexpr double kSearchTauMax = 1.0;

std::string ToString(TrainMode mode);
std::string ToString(Sampler sampler);
TrainMode ParseTrainMode(const std::string& s);
Sampler ParseSampler(const std::string& s);

}  // namespace fairmt

#endif  // FAIRMT_TRAINER_H_
