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

#include "fairmt/metrics.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>

namespace fairmt {

ConfusionCounts CountConfusion(std::span<const PredictionRecord> records,
                               int positive) {
  ConfusionCounts c;
  for (const auto& r : records) {
    const bool gold_pos = r.gold == positive;
    const bool pred_pos = r.pred == positive;
    if (gold_pos) {
      pred_pos ? ++c.tp : ++c.fn;
    } else {
      pred_pos ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

std::optional<double> FalsePositiveRate(const ConfusionCounts& counts) {
  const std::int64_t negatives = counts.fp + counts.tn;
  if (negatives == 0) return std::nullopt;
  return static_cast<double>(counts.fp) / static_cast<double>(negatives);
}

GroupGap FprGroupGap(std::span<const PredictionRecord> records,
                     const AttributeSpec& attribute, int positive) {
  GroupGap gap;
  gap.overall_fpr = FalsePositiveRate(CountConfusion(records, positive));

  std::map<std::string, ConfusionCounts> per_group;
  for (const auto& value : attribute.values) per_group[value];
  for (const auto& r : records) {
    auto attr = r.attrs.find(attribute.name);
    if (attr == r.attrs.end()) continue;
    auto group = per_group.find(attr->second);
    if (group == per_group.end()) continue;
    ConfusionCounts& c = group->second;
    const bool gold_pos = r.gold == positive;
    const bool pred_pos = r.pred == positive;
    if (gold_pos) {
      pred_pos ? ++c.tp : ++c.fn;
    } else {
      pred_pos ? ++c.fp : ++c.tn;
    }
  }

  double sum = 0.0;
  int terms = 0;
  for (const auto& value : attribute.values) {
    const ConfusionCounts& c = per_group[value];
    const auto fpr = FalsePositiveRate(c);
    gap.group_fpr[value] = fpr;
    gap.group_counts[value] = c.Total();
    if (!fpr) {
      gap.skipped_groups.push_back(value);
      continue;
    }
    if (gap.overall_fpr) {
      sum += std::abs(*fpr - *gap.overall_fpr);
      ++terms;
    }
  }
  if (gap.overall_fpr && terms > 0) gap.value = sum;
  return gap;
}

GroupGap MedLanguage(std::span<const PredictionRecord> records,
                     const AttributeSpec& attribute, const std::string& lang,
                     int positive) {
  std::vector<PredictionRecord> subset;
  for (const auto& r : records) {
    if (r.lang == lang) subset.push_back(r);
  }
  return FprGroupGap(subset, attribute, positive);
}

double MedAggregate(
    const std::map<std::string, std::optional<double>>& per_language_med) {
  double sum = 0.0;
  int n = 0;
  for (const auto& [lang, med] : per_language_med) {
    if (!med) continue;
    sum += *med;
    ++n;
  }
  if (n == 0) {
    throw std::domain_error("MED undefined for every language");
  }
  return sum / n;
}

GroupGap Mued(std::span<const PredictionRecord> records,
              const AttributeSpec& attribute, int positive) {
  return FprGroupGap(records, attribute, positive);
}

std::optional<double> RankAuc(std::span<const double> scores,
                              std::span<const bool> is_positive) {
  if (scores.size() != is_positive.size()) {
    throw std::invalid_argument("RankAuc: size mismatch");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Count positive-over-negative wins in half units to stay in integers.
  std::int64_t negatives_below = 0;
  std::int64_t half_wins = 0;
  std::int64_t total_pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::int64_t pos = 0;
    std::int64_t neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      is_positive[order[j]] ? ++pos : ++neg;
      ++j;
    }
    half_wins += 2 * pos * negatives_below + pos * neg;
    negatives_below += neg;
    total_pos += pos;
    i = j;
  }
  const std::int64_t total_neg = negatives_below;
  if (total_pos == 0 || total_neg == 0) return std::nullopt;
  return static_cast<double>(half_wins) /
         (2.0 * static_cast<double>(total_pos) * static_cast<double>(total_neg));
}

PerformanceMetrics ComputePerformance(
    std::span<const PredictionRecord> records, int positive) {
  if (records.empty()) {
    throw std::invalid_argument("performance metrics need records");
  }
  std::set<int> classes;
  std::int64_t correct = 0;
  for (const auto& r : records) {
    classes.insert(r.gold);
    classes.insert(r.pred);
    if (r.gold == r.pred) ++correct;
  }
  const double n = static_cast<double>(records.size());

  PerformanceMetrics m;
  m.accuracy = static_cast<double>(correct) / n;
  double f_sum = 0.0;
  double f_weighted = 0.0;
  for (int c : classes) {
    std::int64_t tp = 0, fp = 0, fn = 0, support = 0;
    for (const auto& r : records) {
      if (r.gold == c) ++support;
      if (r.gold == c && r.pred == c) ++tp;
      if (r.gold != c && r.pred == c) ++fp;
      if (r.gold == c && r.pred != c) ++fn;
    }
    const std::int64_t denom = 2 * tp + fp + fn;
    const double f1 = denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
    f_sum += f1;
    f_weighted += f1 * static_cast<double>(support);
  }
  m.macro_f = f_sum / static_cast<double>(classes.size());
  m.weighted_f = f_weighted / n;

  std::vector<double> scores;
  scores.reserve(records.size());
  auto gold_pos = std::make_unique<bool[]>(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    scores.push_back(records[i].score);
    gold_pos[i] = records[i].gold == positive;
  }
  m.auc = RankAuc(scores, std::span<const bool>(gold_pos.get(), records.size()));
  return m;
}

double Mepd(const std::map<std::string, double>& per_language_macro_f) {
  if (per_language_macro_f.empty()) {
    throw std::invalid_argument("MEPD needs at least one language");
  }
  double mean = 0.0;
  for (const auto& [lang, f] : per_language_macro_f) mean += f;
  mean /= static_cast<double>(per_language_macro_f.size());
  double dev = 0.0;
  for (const auto& [lang, f] : per_language_macro_f) dev += std::abs(f - mean);
  return dev / static_cast<double>(per_language_macro_f.size());
}

double StrategyDestructiveness(const std::map<std::string, double>& med_baseline,
                               const std::map<std::string, double>& med_debiased,
                               SdMode mode) {
  if (med_baseline.empty()) {
    throw std::invalid_argument("SD needs at least one other attribute");
  }
  if (med_baseline.size() != med_debiased.size()) {
    throw std::invalid_argument("SD attribute sets differ");
  }
  double sum = 0.0;
  for (const auto& [attr, base] : med_baseline) {
    auto it = med_debiased.find(attr);
    if (it == med_debiased.end()) {
      throw std::invalid_argument("SD attribute sets differ: '" + attr +
                                  "' missing from debiased");
    }
    const double delta = it->second - base;
    sum += mode == SdMode::kClipPositive ? std::max(delta, 0.0)
                                         : std::min(delta, 0.0);
  }
  return sum / static_cast<double>(med_baseline.size());
}

MetricReport FullReport(std::span<const PredictionRecord> records,
                        const AttributeSpec& attribute, int positive,
                        const std::vector<std::string>& languages) {
  if (records.empty()) {
    throw std::invalid_argument("report needs at least one record");
  }
  std::map<std::string, std::vector<PredictionRecord>> by_lang;
  for (const auto& r : records) by_lang[r.lang].push_back(r);

  std::vector<std::string> langs;
  if (languages.empty()) {
    for (const auto& [lang, rs] : by_lang) langs.push_back(lang);
  } else {
    std::set<std::string> sorted(languages.begin(), languages.end());
    for (const auto& lang : sorted) {
      if (by_lang.contains(lang)) langs.push_back(lang);
    }
  }

  MetricReport report;
  report.attribute = attribute.name;
  report.positive = positive;

  // Languages are independent; each slot is written by one iteration.
  std::vector<LanguageMetrics> blocks(langs.size());
  const int n_langs = static_cast<int>(langs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_langs; ++i) {
    const auto& rs = by_lang.at(langs[i]);
    blocks[i].records = static_cast<std::int64_t>(rs.size());
    blocks[i].performance = ComputePerformance(rs, positive);
    blocks[i].med = FprGroupGap(rs, attribute, positive);
  }

  std::map<std::string, std::optional<double>> meds;
  std::map<std::string, double> macro_fs;
  double auc_sum = 0.0;
  int auc_n = 0;
  for (int i = 0; i < n_langs; ++i) {
    const std::string& lang = langs[i];
    const LanguageMetrics& b = blocks[i];
    meds[lang] = b.med.value;
    macro_fs[lang] = b.performance.macro_f;
    report.accuracy_avg += b.performance.accuracy;
    report.macro_f_avg += b.performance.macro_f;
    report.weighted_f_avg += b.performance.weighted_f;
    if (b.performance.auc) {
      auc_sum += *b.performance.auc;
      ++auc_n;
    } else {
      report.notices.push_back("auc undefined for language '" + lang + "'");
    }
    for (const auto& g : b.med.skipped_groups) {
      report.notices.push_back("med: group '" + g + "' skipped in language '" +
                               lang + "' (no negative-gold records)");
    }
    if (!b.med.value) {
      report.notices.push_back("med undefined for language '" + lang + "'");
    }
    report.per_language.emplace(lang, b);
  }
  if (n_langs > 0) {
    report.accuracy_avg /= n_langs;
    report.macro_f_avg /= n_langs;
    report.weighted_f_avg /= n_langs;
    report.mepd = Mepd(macro_fs);
  }
  if (auc_n > 0) report.auc_avg = auc_sum / auc_n;

  bool any_med = false;
  for (const auto& [lang, m] : meds) any_med = any_med || m.has_value();
  if (any_med) {
    report.med_avg = MedAggregate(meds);
  } else {
    report.notices.push_back("med_avg undefined: no language has a defined MED");
  }

  report.overall = ComputePerformance(records, positive);
  report.mued = Mued(records, attribute, positive);
  for (const auto& g : report.mued.skipped_groups) {
    report.notices.push_back("mued: group '" + g +
                             "' skipped (no negative-gold records)");
  }
  if (!report.mued.value) report.notices.push_back("mued undefined");
  return report;
}

}  // namespace fairmt
