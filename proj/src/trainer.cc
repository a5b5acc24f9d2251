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

#include "fairmt/trainer.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>

#include "parallel.h"

namespace fairmt {
namespace {

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::array<std::uint32_t, 2> out;
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::string AttrValue(const Sample& s, const std::string& attribute) {
  auto it = s.attrs.find(attribute);
  return it == s.attrs.end() ? std::string() : it->second;
}

}  // namespace

void TrainConfig::Validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning rate must be > 0");
  }
  weights.Validate();
}

std::vector<std::vector<int>> MakeBatches(const Dataset& dataset,
                                          int batch_size, Sampler sampler,
                                          std::uint64_t seed,
                                          const std::string& attribute) {
  const int n = static_cast<int>(dataset.samples.size());
  if (n == 0) throw std::invalid_argument("cannot batch an empty dataset");
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  std::mt19937_64 rng(seed);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  if (sampler == Sampler::kStratified) {
    using Key = std::tuple<int, std::string, std::string>;
    std::map<Key, std::vector<int>> strata;
    for (int idx : order) {
      const Sample& s = dataset.samples[idx];
      strata[{s.label, s.lang, AttrValue(s, attribute)}].push_back(idx);
    }
    // Place member j of a stratum of size m at (j + offset) / m, with a
    // random offset per stratum, then sort by position.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::tuple<double, int, int>> placed;
    placed.reserve(n);
    int stratum_id = 0;
    for (const auto& [key, members] : strata) {
      const double offset = unit(rng);
      const double m = static_cast<double>(members.size());
      for (std::size_t j = 0; j < members.size(); ++j) {
        placed.emplace_back((static_cast<double>(j) + offset) / m, stratum_id,
                            members[j]);
      }
      ++stratum_id;
    }
    std::sort(placed.begin(), placed.end());
    for (int i = 0; i < n; ++i) order[i] = std::get<2>(placed[i]);
  }

  std::vector<std::vector<int>> batches;
  if (batch_size > n) {
    std::cerr << "warning: batch_size " << batch_size << " exceeds dataset size "
              << n << "; using a single batch\n";
    batches.push_back(order);
    return batches;
  }
  for (int start = 0; start < n; start += batch_size) {
    const int end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  if (batches.size() > 1 && batches.back().size() < 2) {
    auto tail = std::move(batches.back());
    batches.pop_back();
    batches.back().insert(batches.back().end(), tail.begin(), tail.end());
  }
  return batches;
}

AdamState AdamState::Zeros(Eigen::Index size) {
  AdamState s;
  s.m = Vector::Zero(size);
  s.v = Vector::Zero(size);
  return s;
}

void AdamStep(Vector& params, const Vector& gradient, AdamState& state,
              double learning_rate) {
  if (gradient.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw std::invalid_argument("Adam: shape mismatch");
  }
  for (Eigen::Index i = 0; i < gradient.size(); ++i) {
    if (!std::isfinite(gradient[i])) {
      throw std::runtime_error("Adam: non-finite gradient at index " +
                               std::to_string(i));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double g = gradient[i];
    state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * g;
    state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
  }
}

TrainedModel TrainModel(const Dataset& train, const TrainConfig& config) {
  config.Validate();
  if (train.samples.empty()) {
    throw std::invalid_argument("training set is empty");
  }
  std::vector<std::string> all_tokens;
  for (const auto& s : train.samples) {
    all_tokens.insert(all_tokens.end(), s.tokens.begin(), s.tokens.end());
  }
  EncoderDims dims = config.dims;
  dims.num_classes = train.num_classes;

  TrainedModel model;
  model.params = InitParams(Vocab::FromTokens(all_tokens), dims, config.seed);

  std::vector<BatchExample> examples;
  examples.reserve(train.samples.size());
  for (const auto& s : train.samples) {
    examples.push_back(MakeBatchExample(s, model.params.vocab, config.attribute));
  }

  Vector theta = model.params.blocks.Flatten();
  AdamState adam = AdamState::Zeros(theta.size());
  std::vector<BatchExample> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches =
        MakeBatches(train, config.batch_size, config.sampler,
                    MixSeed(config.seed, 0x5eed, epoch), config.attribute);
    EpochStats stats;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      batch.clear();
      for (int idx : batches[b]) batch.push_back(examples[idx]);
      if (batch.size() < 2) continue;
      const LossBreakdown loss =
          LossAndGradient(batch, model.params, config.weights);
      if (!std::isfinite(loss.total)) {
        throw std::runtime_error("non-finite loss at epoch " +
                                 std::to_string(epoch + 1) + ", batch " +
                                 std::to_string(b + 1));
      }
      try {
        AdamStep(theta, loss.gradient, adam, config.learning_rate);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string(e.what()) + " at epoch " +
                                 std::to_string(epoch + 1) + ", batch " +
                                 std::to_string(b + 1));
      }
      model.params.blocks.Unflatten(theta);
      stats.l_lf += loss.l_lf;
      stats.l_td += loss.l_td;
      stats.l_ce += loss.l_ce;
      stats.total += loss.total;
    }
    const double nb = static_cast<double>(batches.size());
    stats.l_lf /= nb;
    stats.l_td /= nb;
    stats.l_ce /= nb;
    stats.total /= nb;
    model.history.epochs.push_back(stats);
  }
  return model;
}

TrainResult Train(const Dataset& train, const TrainConfig& config) {
  config.Validate();
  TrainResult result;
  result.mode = config.mode;
  if (config.mode == TrainMode::kMerge) {
    result.models.push_back(TrainModel(train, config));
    return result;
  }
  std::vector<std::string> langs;
  for (const auto& lang : train.languages) {
    const bool present = std::any_of(
        train.samples.begin(), train.samples.end(),
        [&](const Sample& s) { return s.lang == lang; });
    if (present) langs.push_back(lang);
  }
  if (langs.empty()) throw std::invalid_argument("training set is empty");
  result.models.resize(langs.size());
  internal::ParallelFor(static_cast<int>(langs.size()), [&](int i) {
    result.models[i] = TrainModel(FilterLanguage(train, langs[i]), config);
    result.models[i].language = langs[i];
  });
  return result;
}

std::vector<PredictionRecord> Evaluate(const EncoderParams& params,
                                       const Dataset& dataset, int positive) {
  if (positive < 0 || positive >= params.dims.num_classes) {
    throw std::invalid_argument("positive class outside classifier range");
  }
  std::vector<PredictionRecord> records;
  if (dataset.samples.empty()) return records;
  std::vector<std::vector<int>> ids;
  ids.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) ids.push_back(params.vocab.Ids(s.tokens));
  const EncoderCache cache = EncodeBatch(ids, params);
  const RowMatrix probs =
      kernels::SoftmaxRows(ClassifierLogits(cache.reps, params));

  records.reserve(dataset.samples.size());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& s = dataset.samples[i];
    PredictionRecord r;
    r.id = s.id;
    r.lang = s.lang;
    r.attrs = s.attrs;
    r.gold = s.label;
    Eigen::Index best = 0;
    probs.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
    r.pred = static_cast<int>(best);
    r.score = probs(static_cast<Eigen::Index>(i), positive);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<PredictionRecord> Evaluate(const TrainResult& result,
                                       const Dataset& dataset, int positive) {
  if (result.models.empty()) throw std::invalid_argument("no trained model");
  if (result.mode == TrainMode::kMerge) {
    return Evaluate(result.models.front().params, dataset, positive);
  }
  std::map<std::string, std::vector<PredictionRecord>> by_lang;
  for (const auto& model : result.models) {
    by_lang[model.language] =
        Evaluate(model.params, FilterLanguage(dataset, model.language), positive);
  }
  // Restore dataset order.
  std::map<std::string, std::size_t> cursor;
  std::vector<PredictionRecord> records;
  for (const auto& s : dataset.samples) {
    auto it = by_lang.find(s.lang);
    if (it == by_lang.end()) {
      throw std::invalid_argument("no individual model for language '" +
                                  s.lang + "'");
    }
    records.push_back(it->second[cursor[s.lang]++]);
  }
  return records;
}

TrainResult RunExperiment(const Dataset& train,
                          const std::map<std::string, Dataset>& heldout,
                          const TrainConfig& config) {
  TrainResult result = Train(train, config);
  const AttributeSpec* attr = train.FindAttribute(config.attribute);
  if (attr == nullptr) {
    throw std::invalid_argument("unknown attribute '" + config.attribute + "'");
  }
  for (const auto& [split, data] : heldout) {
    if (data.samples.empty()) continue;
    const auto records = Evaluate(result, data, config.positive);
    const MetricReport report =
        FullReport(records, *attr, config.positive, data.languages);
    for (auto& model : result.models) model.history.final_reports[split] = report;
  }
  return result;
}

SearchResult RandomSearch(const Dataset& train, const Dataset& heldout,
                          const TrainConfig& base, int trials,
                          std::uint64_t seed, double macro_f_floor) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const AttributeSpec* attr = train.FindAttribute(base.attribute);
  if (attr == nullptr) {
    throw std::invalid_argument("unknown attribute '" + base.attribute + "'");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SearchResult out;
  out.trials.resize(trials);
  for (int t = 0; t < trials; ++t) {
    double u1 = unit(rng);
    double u2 = unit(rng);
    if (u1 + u2 > 1.0) {
      u1 = 1.0 - u1;
      u2 = 1.0 - u2;
    }
    const double log_tau =
        std::log(kSearchTauMin) +
        unit(rng) * (std::log(kSearchTauMax) - std::log(kSearchTauMin));
    out.trials[t].index = t;
    out.trials[t].weights.alpha = kSearchSimplexCap * u1;
    out.trials[t].weights.beta = kSearchSimplexCap * u2;
    out.trials[t].weights.tau = std::exp(log_tau);
  }

  auto run = [&](const LossWeights& w) {
    TrainConfig cfg = base;
    cfg.weights = w;
    const TrainResult trained = Train(train, cfg);
    const auto records = Evaluate(trained, heldout, base.positive);
    return FullReport(records, *attr, base.positive, heldout.languages);
  };

  // Slot 0 is the baseline; trial t lives in slot t + 1.
  std::vector<MetricReport> reports(trials + 1);
  internal::ParallelFor(trials + 1, [&](int i) {
    if (i == 0) {
      LossWeights w = base.weights;
      w.alpha = 0.0;
      w.beta = 0.0;
      reports[0] = run(w);
    } else {
      reports[i] = run(out.trials[i - 1].weights);
    }
  });
  out.baseline = reports[0];

  const double inf = std::numeric_limits<double>::infinity();
  int best_feasible = -1;
  int best_any = 0;
  for (int t = 0; t < trials; ++t) {
    SearchTrial& trial = out.trials[t];
    trial.report = reports[t + 1];
    trial.feasible =
        trial.report.macro_f_avg >= out.baseline.macro_f_avg - macro_f_floor;
    const double med = trial.report.med_avg.value_or(inf);
    const auto med_of = [&](int i) {
      return out.trials[i].report.med_avg.value_or(inf);
    };
    if (med < med_of(best_any)) best_any = t;
    if (trial.feasible && (best_feasible < 0 || med < med_of(best_feasible))) {
      best_feasible = t;
    }
  }
  out.fallback = best_feasible < 0;
  out.best_index = out.fallback ? best_any : best_feasible;
  out.best = base;
  out.best.weights = out.trials[out.best_index].weights;
  return out;
}

std::string ToString(TrainMode mode) {
  return mode == TrainMode::kMerge ? "merge" : "individual";
}

std::string ToString(Sampler sampler) {
  return sampler == Sampler::kStratified ? "stratified" : "uniform";
}

TrainMode ParseTrainMode(const std::string& s) {
  if (s == "merge") return TrainMode::kMerge;
  if (s == "individual") return TrainMode::kIndividual;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

Sampler ParseSampler(const std::string& s) {
  if (s == "stratified") return Sampler::kStratified;
  if (s == "uniform") return Sampler::kUniform;
  throw std::invalid_argument("unknown sampler '" + s + "'");
}

}  // namespace fairmt
