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

#ifndef FAIRMT_TYPES_H_
#define FAIRMT_TYPES_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fairmt {

// Attribute name -> attribute value. Values are opaque, already-binarized
// strings supplied by the data producer.
using AttributeMap = std::map<std::string, std::string>;

inline constexpr std::size_t kDefaultMaxLen = 32;

struct Sample {
  std::string id;
  std::vector<std::string> tokens;
  int label = 0;
  AttributeMap attrs;
  std::string lang;
  // Split tag ("train", "dev", "test"); empty when the sample is untagged.
  std::string split;

  bool operator==(const Sample&) const = default;
};

struct AttributeSpec {
  std::string name;
  std::vector<std::string> values;  // ordered, distinct, at least two

  bool operator==(const AttributeSpec&) const = default;
};

struct Dataset {
  std::vector<Sample> samples;
  int num_classes = 2;
  std::vector<std::string> languages;  // ordered set
  std::vector<AttributeSpec> attribute_specs;
  std::size_t max_len = kDefaultMaxLen;

  const AttributeSpec* FindAttribute(const std::string& name) const;
  bool operator==(const Dataset&) const = default;
};

struct PredictionRecord {
  std::string id;
  std::string lang;
  AttributeMap attrs;
  int gold = 0;
  int pred = 0;
  // Model probability of the designated positive class.
  double score = 0.0;

  bool operator==(const PredictionRecord&) const = default;
};

struct LossWeights {
  double alpha = 0.0;
  double beta = 0.0;
  double tau = 0.1;
  // Temperature of the debiasing term; shares `tau` when unset.
  std::optional<double> tau_td;

  double TauLf() const { return tau; }
  double TauTd() const { return tau_td.value_or(tau); }
  double CeWeight() const { return 1.0 - alpha - beta; }

  // Throws std::invalid_argument when alpha/beta are negative, alpha + beta
  // exceeds 1, or a temperature is not positive.
  void Validate() const;
};

struct Violation {
  std::string sample_id;  // empty for dataset-level rules
  std::string rule;

  bool operator==(const Violation&) const = default;
  auto operator<=>(const Violation&) const = default;
};

// Checks every sample/dataset invariant. Returns violations sorted by
// (sample id, rule), so the result does not depend on sample order.
std::vector<Violation> ValidateDataset(const Dataset& dataset);

// Returns the samples carrying the given split tag.
Dataset FilterSplit(const Dataset& dataset, const std::string& split);

// Returns the samples of one language. The schema is preserved.
Dataset FilterLanguage(const Dataset& dataset, const std::string& lang);

}  // namespace fairmt

#endif  // FAIRMT_TYPES_H_
