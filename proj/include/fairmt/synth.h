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

#ifndef FAIRMT_SYNTH_H_
#define FAIRMT_SYNTH_H_

// Seeded generator of multilingual, attribute-biased classification corpora.
//
// Each language has its own disjoint vocabulary (tokens are prefixed with the
// language code). Every sample carries one marker token per sensitive
// attribute, and with probability `label_signal_strength` one token that
// indicates its class. Bias is injected by raising the positive-label
// probability of each attribute's disadvantaged value by 0.3 * bias_strength
// relative to the advantaged value, so a model can pick up the markers as
// evidence for the positive class.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairmt/types.h"

namespace fairmt {

struct LanguageSpec {
  std::string code;
  int samples = 0;
  double positive_rate = 0.3;
};

struct AttributeMarginal {
  AttributeSpec spec;
  std::vector<double> probs;  // one per value, sums to 1
  int disadvantaged = 1;      // index into spec.values
};

inline constexpr double kBiasShiftScale = 0.3;

struct CorpusSpec {
  std::vector<LanguageSpec> languages;
  int num_classes = 2;
  int positive_class = 1;
  std::vector<AttributeMarginal> attributes;
  int vocab_per_language = 60;
  int signal_tokens_per_class = 4;
  int min_tokens = 6;
  int max_tokens = 12;
  double label_signal_strength = 0.6;
  double bias_strength = 0.0;
  double train_fraction = 0.8;
  double dev_fraction = 0.1;

  // Throws std::invalid_argument naming the first broken invariant.
  void Validate() const;
};

// Five languages with per-language positive rates shaped like a skewed
// hate-speech corpus (one sparse language), binary labels, and two binary
// attributes ("gender", "age"). Language sizes are imbalanced (en 8000,
// es 4000, it 4000, pl 6000, pt 600 samples) so that "pt" is low-resource;
// `size_scale` multiplies every size (minimum 10 per language).
CorpusSpec DefaultCorpusSpec(double bias_strength = 0.8,
                             double size_scale = 1.0);

// Positive-label probability for a sample of `lang` whose attribute values
// are given by `disadvantaged_flags` (one flag per spec attribute).
// Two unbiased languages of 200 samples in which every sample carries a class
// signal token, so the classes are linearly separable under mean pooling.
CorpusSpec SeparableCorpusSpec();

double PositiveProbability(const CorpusSpec& spec, const LanguageSpec& lang,
                           const std::vector<bool>& disadvantaged_flags);

// Deterministic per (spec, seed). Samples carry split tags "train", "dev" and
// "test", assigned per language.
Dataset Generate(const CorpusSpec& spec, std::uint64_t seed);

struct GroupRate {
  std::string lang;
  std::string value;
  std::int64_t count = 0;
  std::int64_t positives = 0;
  std::optional<double> rate;  // absent for empty groups
};

// Positive-label rate per (language, attribute value), ordered by language
// then by attribute value order.
std::vector<GroupRate> MeasureCorpusBias(const Dataset& dataset,
                                         const std::string& attribute,
                                         int positive);

}  // namespace fairmt

#endif  // FAIRMT_SYNTH_H_
