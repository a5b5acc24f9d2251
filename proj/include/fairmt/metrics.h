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

#ifndef FAIRMT_METRICS_H_
#define FAIRMT_METRICS_H_

// Group-fairness and performance metrics for multilingual classifiers,
// computed from prediction records.
//
// All FPR-based metrics view predictions as binary against a designated
// positive class. A group whose FPR is undefined (no negative-gold records)
// is skipped and reported, never counted as zero.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairmt/types.h"

namespace fairmt {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t Total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts CountConfusion(std::span<const PredictionRecord> records,
                               int positive);

// fp / (fp + tn); nullopt when the group has no negative-gold records.
std::optional<double> FalsePositiveRate(const ConfusionCounts& counts);

// Sum over attribute groups of |FPR(group) - FPR(all)|.
struct GroupGap {
  std::optional<double> value;
  std::optional<double> overall_fpr;
  std::map<std::string, std::optional<double>> group_fpr;
  std::map<std::string, std::int64_t> group_counts;
  std::vector<std::string> skipped_groups;

  bool operator==(const GroupGap&) const = default;
};

// Gap over `records` taken as a single population. Records whose attribute
// value is not one of `attribute.values` are ignored for group terms.
GroupGap FprGroupGap(std::span<const PredictionRecord> records,
                     const AttributeSpec& attribute, int positive);

// Monolingual equality difference of one language.
GroupGap MedLanguage(std::span<const PredictionRecord> records,
                     const AttributeSpec& attribute, const std::string& lang,
                     int positive);

// Arithmetic mean of the defined per-language values. Throws
// std::domain_error when none is defined.
double MedAggregate(
    const std::map<std::string, std::optional<double>>& per_language_med);

// Multilingual equality difference: the group gap on all languages pooled.
GroupGap Mued(std::span<const PredictionRecord> records,
              const AttributeSpec& attribute, int positive);

struct PerformanceMetrics {
  double accuracy = 0.0;
  double macro_f = 0.0;
  double weighted_f = 0.0;
  std::optional<double> auc;

  bool operator==(const PerformanceMetrics&) const = default;
};

// Per-class F1 is taken over the union of gold and predicted classes, with a
// zero denominator scored as 0. AUC is the rank-sum probability with ties
// credited 0.5, undefined when either gold class is absent. Throws
// std::invalid_argument on empty input.
PerformanceMetrics ComputePerformance(
    std::span<const PredictionRecord> records, int positive);

// Mann-Whitney AUC of `scores` with `is_positive` gold flags.
std::optional<double> RankAuc(std::span<const double> scores,
                              std::span<const bool> is_positive);

// Mean absolute deviation of per-language macro-F from their mean.
double Mepd(const std::map<std::string, double>& per_language_macro_f);

enum class SdMode {
  kClipPositive,  // mean of max(delta, 0)
  kLiteralMin,    // mean of min(delta, 0), as the formula is printed
};

// Strategy destructiveness over the other-attribute set. Throws
// std::invalid_argument on empty or mismatched key sets.
double StrategyDestructiveness(const std::map<std::string, double>& med_baseline,
                               const std::map<std::string, double>& med_debiased,
                               SdMode mode = SdMode::kClipPositive);

struct LanguageMetrics {
  std::int64_t records = 0;
  PerformanceMetrics performance;
  GroupGap med;

  bool operator==(const LanguageMetrics&) const = default;
};

struct MetricReport {
  std::string attribute;
  int positive = 1;
  std::map<std::string, LanguageMetrics> per_language;
  PerformanceMetrics overall;
  std::optional<double> med_avg;
  GroupGap mued;
  double mepd = 0.0;
  // Mean over languages of per-language performance (the "Avg" row).
  double accuracy_avg = 0.0;
  double macro_f_avg = 0.0;
  double weighted_f_avg = 0.0;
  std::optional<double> auc_avg;
  std::vector<std::string> notices;

  bool operator==(const MetricReport&) const = default;
};

// Assembles every per-language and aggregate metric. Languages without
// records are omitted; when `languages` is empty, the languages present in
// the records are used. Throws std::invalid_argument on empty input.
MetricReport FullReport(std::span<const PredictionRecord> records,
                        const AttributeSpec& attribute, int positive,
                        const std::vector<std::string>& languages = {});

}  // namespace fairmt

#endif  // FAIRMT_METRICS_H_
