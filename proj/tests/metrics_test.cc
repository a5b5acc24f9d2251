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
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"

namespace fairmt {
namespace {

const AttributeSpec kGender{"g", {"a", "b"}};

PredictionRecord Rec(const std::string& lang, const std::string& group,
                     int gold, int pred, double score = 0.5) {
  PredictionRecord r;
  r.id = lang + group + std::to_string(gold) + std::to_string(pred);
  r.lang = lang;
  r.attrs["g"] = group;
  r.gold = gold;
  r.pred = pred;
  r.score = score;
  return r;
}

// Group a: 2 negatives, 1 FP (0.5); group b: 2 negatives, 0 FP (0.0).
std::vector<PredictionRecord> HandExample() {
  return {Rec("en", "a", 0, 1), Rec("en", "a", 0, 0), Rec("en", "b", 0, 0),
          Rec("en", "b", 0, 0), Rec("en", "a", 1, 1)};
}

TEST(ConfusionTest, DirectCounts) {
  std::vector<PredictionRecord> rs = {Rec("en", "a", 0, 1), Rec("en", "a", 0, 0),
                                      Rec("en", "b", 0, 0), Rec("en", "b", 0, 0)};
  const ConfusionCounts c = CountConfusion(rs, 1);
  EXPECT_EQ(c.fp, 1);
  EXPECT_EQ(c.tn, 3);
  EXPECT_EQ(c.tp + c.fn, 0);
  for (auto& r : rs) r.pred = r.gold;
  const ConfusionCounts perfect = CountConfusion(rs, 1);
  EXPECT_EQ(perfect.fp + perfect.fn, 0);
}

TEST(ConfusionTest, MatchesBruteForceTally) {
  std::mt19937_64 rng(11);
  const auto rs = testing::RandomRecords(rng, 200, 3, 3);
  const ConfusionCounts c = CountConfusion(rs, 2);
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& r : rs) {
    if (r.gold == 2 && r.pred == 2) ++tp;
    if (r.gold != 2 && r.pred == 2) ++fp;
    if (r.gold != 2 && r.pred != 2) ++tn;
    if (r.gold == 2 && r.pred != 2) ++fn;
  }
  EXPECT_EQ(c, (ConfusionCounts{tp, fp, tn, fn}));
}

TEST(FalsePositiveRateTest, Cases) {
  EXPECT_DOUBLE_EQ(*FalsePositiveRate({0, 1, 3, 0}), 0.25);
  EXPECT_DOUBLE_EQ(*FalsePositiveRate({0, 0, 5, 0}), 0.0);
  EXPECT_FALSE(FalsePositiveRate({3, 0, 0, 2}).has_value());
}

TEST(MedLanguageTest, HandCountedExample) {
  const auto rs = HandExample();
  const GroupGap gap = MedLanguage(rs, kGender, "en", 1);
  EXPECT_DOUBLE_EQ(*gap.overall_fpr, 0.25);
  EXPECT_DOUBLE_EQ(*gap.value, 0.5);
  EXPECT_TRUE(gap.skipped_groups.empty());
  // Records from other languages are ignored.
  auto more = rs;
  more.push_back(Rec("it", "b", 0, 1));
  EXPECT_EQ(MedLanguage(more, kGender, "en", 1), gap);
}

TEST(MedLanguageTest, IdenticalGroupsGiveZero) {
  std::vector<PredictionRecord> rs = {Rec("en", "a", 0, 1), Rec("en", "a", 0, 0),
                                      Rec("en", "b", 0, 1), Rec("en", "b", 0, 0)};
  EXPECT_DOUBLE_EQ(*MedLanguage(rs, kGender, "en", 1).value, 0.0);
}

TEST(MedLanguageTest, AbsentGroupIsSkipped) {
  std::vector<PredictionRecord> rs = {Rec("en", "a", 0, 1), Rec("en", "a", 0, 0),
                                      Rec("en", "b", 1, 1)};
  const GroupGap gap = MedLanguage(rs, kGender, "en", 1);
  // Overall FPR equals group a's FPR (b has no negatives).
  EXPECT_DOUBLE_EQ(*gap.value, 0.0);
  EXPECT_EQ(gap.skipped_groups, std::vector<std::string>{"b"});
  EXPECT_FALSE(gap.group_fpr.at("b").has_value());

  // No negatives at all: undefined.
  std::vector<PredictionRecord> pos = {Rec("en", "a", 1, 1)};
  EXPECT_FALSE(MedLanguage(pos, kGender, "en", 1).value.has_value());
}

TEST(MedAggregateTest, PublishedAverage) {
  const double v = MedAggregate({{"en", 0.0982},
                                 {"it", 0.0225},
                                 {"pl", 0.0512},
                                 {"pt", 0.0586},
                                 {"es", 0.2292}});
  EXPECT_NEAR(v, 0.0919, 1e-4);
  EXPECT_DOUBLE_EQ(MedAggregate({{"a", 0.3}, {"b", 0.3}, {"c", 0.3}}), 0.3);
  EXPECT_DOUBLE_EQ(MedAggregate({{"a", 0.17}}), 0.17);
  EXPECT_DOUBLE_EQ(MedAggregate({{"a", 0.2}, {"b", std::nullopt}}), 0.2);
  EXPECT_THROW(MedAggregate({{"a", std::nullopt}}), std::domain_error);
}

TEST(MuedTest, PooledHandExampleAndOracle) {
  auto rs = HandExample();
  for (std::size_t i = 0; i < rs.size(); ++i) rs[i].lang = i % 2 ? "en" : "it";
  EXPECT_DOUBLE_EQ(*Mued(rs, kGender, 1).value, 0.5);

  std::vector<PredictionRecord> same = {Rec("en", "a", 0, 1), Rec("it", "a", 0, 0),
                                        Rec("en", "b", 0, 1), Rec("it", "b", 0, 0)};
  EXPECT_DOUBLE_EQ(*Mued(same, kGender, 1).value, 0.0);

  std::mt19937_64 rng(5);
  const auto random = testing::RandomRecords(rng, 300, 4);
  EXPECT_NEAR(*Mued(random, kGender, 1).value,
              *testing::NaiveGap(random, "g", {"a", "b"}, 1), 1e-12);
}

TEST(PerformanceTest, HandCases) {
  std::vector<PredictionRecord> rs = {Rec("en", "a", 1, 1), Rec("en", "a", 0, 1),
                                      Rec("en", "a", 1, 0), Rec("en", "a", 0, 0)};
  const auto m = ComputePerformance(rs, 1);
  EXPECT_DOUBLE_EQ(m.macro_f, 0.5);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.5);

  std::vector<PredictionRecord> sep = {
      Rec("en", "a", 1, 1, 0.9), Rec("en", "a", 1, 1, 0.8),
      Rec("en", "a", 0, 0, 0.1), Rec("en", "a", 0, 0, 0.2)};
  EXPECT_DOUBLE_EQ(*ComputePerformance(sep, 1).auc, 1.0);
  for (auto& r : sep) r.score = 0.4;
  EXPECT_DOUBLE_EQ(*ComputePerformance(sep, 1).auc, 0.5);

  // A class predicted but never gold still enters the macro average.
  std::vector<PredictionRecord> extra = {Rec("en", "a", 0, 0), Rec("en", "a", 0, 2)};
  EXPECT_DOUBLE_EQ(ComputePerformance(extra, 1).macro_f, (2.0 / 3.0) / 2.0);
  EXPECT_FALSE(ComputePerformance(extra, 1).auc.has_value());
  EXPECT_THROW(ComputePerformance({}, 1), std::invalid_argument);
}

TEST(PerformanceTest, AucInvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(8);
  auto rs = testing::RandomRecords(rng, 150, 1);
  const double before = *ComputePerformance(rs, 1).auc;
  for (auto& r : rs) r.score = std::exp(3.0 * r.score) - 7.0;
  EXPECT_DOUBLE_EQ(*ComputePerformance(rs, 1).auc, before);
}

TEST(MepdTest, Values) {
  EXPECT_NEAR(Mepd({{"en", 0.8513},
                    {"it", 0.6517},
                    {"pl", 0.7158},
                    {"pt", 0.6440},
                    {"es", 0.5479}}),
              0.0811, 1e-4);
  EXPECT_DOUBLE_EQ(Mepd({{"a", 0.7}, {"b", 0.7}}), 0.0);
  EXPECT_NEAR(Mepd({{"a", 0.8}, {"b", 0.6}}), 0.1, 1e-15);
  EXPECT_THROW(Mepd({}), std::invalid_argument);
}

TEST(StrategyDestructivenessTest, PublishedValues) {
  const std::map<std::string, double> base{
      {"gender", 0.0645}, {"ethnicity", 0.0278}, {"country", 0.0562}};
  EXPECT_NEAR(StrategyDestructiveness(
                  base, {{"gender", 0.0685}, {"ethnicity", 0.0886}, {"country", 0.1065}}),
              0.0383, 1e-4);
  EXPECT_NEAR(StrategyDestructiveness(
                  base, {{"gender", 0.0763}, {"ethnicity", 0.0426}, {"country", 0.1062}}),
              0.0255, 1e-4);
  const std::map<std::string, double> sent{
      {"gender", 0.0286}, {"ethnicity", 0.0300}, {"country", 0.0266}};
  EXPECT_NEAR(StrategyDestructiveness(base, sent), 0.0007, 1e-4);
  EXPECT_NEAR(StrategyDestructiveness(base, sent, SdMode::kLiteralMin),
              (-0.0359 - 0.0296) / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(StrategyDestructiveness(base, base), 0.0);
  const std::map<std::string, double> lower{
      {"gender", 0.01}, {"ethnicity", 0.01}, {"country", 0.01}};
  EXPECT_DOUBLE_EQ(StrategyDestructiveness(base, lower), 0.0);
}

TEST(FullReportTest, InternalConsistencyAndOracle) {
  std::mt19937_64 rng(21);
  const auto rs = testing::RandomRecords(rng, 200, 5);
  const MetricReport report = FullReport(rs, kGender, 1);
  ASSERT_EQ(report.per_language.size(), 5u);
  std::map<std::string, std::optional<double>> meds;
  std::vector<double> macro;
  for (const auto& [lang, block] : report.per_language) {
    meds[lang] = block.med.value;
    macro.push_back(block.performance.macro_f);
    const auto sub = testing::OfLanguage(rs, lang);
    const auto oracle = testing::NaivePerf(sub, 1);
    EXPECT_NEAR(block.performance.accuracy, oracle.accuracy, 1e-12);
    EXPECT_NEAR(block.performance.macro_f, oracle.macro_f, 1e-12);
    EXPECT_NEAR(block.performance.weighted_f, oracle.weighted_f, 1e-12);
    EXPECT_NEAR(*block.performance.auc, *oracle.auc, 1e-12);
    EXPECT_NEAR(*block.med.value, *testing::NaiveGap(sub, "g", {"a", "b"}, 1),
                1e-12);
  }
  EXPECT_DOUBLE_EQ(*report.med_avg, MedAggregate(meds));
  EXPECT_NEAR(report.mepd, testing::NaiveMepd(macro), 1e-12);
  EXPECT_NEAR(*report.mued.value, *testing::NaiveGap(rs, "g", {"a", "b"}, 1),
              1e-12);
}

TEST(FullReportTest, SingleLanguageAndPermutationInvariance) {
  std::mt19937_64 rng(4);
  auto rs = testing::RandomRecords(rng, 60, 1);
  const MetricReport report = FullReport(rs, kGender, 1);
  EXPECT_TRUE(report.mued.value.has_value());
  EXPECT_DOUBLE_EQ(report.mepd, 0.0);
  std::shuffle(rs.begin(), rs.end(), rng);
  EXPECT_EQ(FullReport(rs, kGender, 1), report);
}

TEST(FullReportTest, UndefinedValuesAreNoticedNotZeroed) {
  std::vector<PredictionRecord> rs = {Rec("en", "a", 0, 1), Rec("en", "b", 0, 0),
                                      Rec("it", "a", 1, 1), Rec("it", "b", 1, 0)};
  const MetricReport report = FullReport(rs, kGender, 1);
  EXPECT_FALSE(report.per_language.at("it").med.value.has_value());
  EXPECT_DOUBLE_EQ(*report.med_avg, 1.0);
  EXPECT_FALSE(report.notices.empty());
  EXPECT_THROW(FullReport({}, kGender, 1), std::invalid_argument);
}

}  // namespace
}  // namespace fairmt
