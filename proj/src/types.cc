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

#include "fairmt/types.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace fairmt {

const AttributeSpec* Dataset::FindAttribute(const std::string& name) const {
  for (const auto& spec : attribute_specs) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

void LossWeights::Validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw std::invalid_argument("loss weights alpha and beta must be >= 0");
  }
  if (alpha + beta > 1.0 + 1e-12) {
    throw std::invalid_argument("loss weights must satisfy alpha + beta <= 1");
  }
  if (!(tau > 0.0) || !(TauTd() > 0.0)) {
    throw std::invalid_argument("temperature must be > 0");
  }
}

std::vector<Violation> ValidateDataset(const Dataset& dataset) {
  std::vector<Violation> out;
  if (dataset.num_classes < 1) {
    out.push_back({"", "num_classes must be >= 1"});
  }
  const std::set<std::string> languages(dataset.languages.begin(),
                                        dataset.languages.end());
  if (languages.size() != dataset.languages.size()) {
    out.push_back({"", "languages must be distinct"});
  }
  for (const auto& spec : dataset.attribute_specs) {
    const std::set<std::string> values(spec.values.begin(), spec.values.end());
    if (spec.values.size() < 2) {
      out.push_back({"", "attribute '" + spec.name + "' needs >= 2 values"});
    }
    if (values.size() != spec.values.size()) {
      out.push_back({"", "attribute '" + spec.name + "' has duplicate values"});
    }
  }

  for (const auto& s : dataset.samples) {
    if (s.tokens.empty()) out.push_back({s.id, "tokens must be nonempty"});
    if (s.tokens.size() > dataset.max_len) {
      out.push_back({s.id, "token count exceeds max_len " +
                               std::to_string(dataset.max_len)});
    }
    if (s.label < 0 || s.label >= dataset.num_classes) {
      out.push_back({s.id, "label " + std::to_string(s.label) +
                               " outside [0, " +
                               std::to_string(dataset.num_classes) + ")"});
    }
    if (s.lang.empty()) {
      out.push_back({s.id, "lang must be nonempty"});
    } else if (!languages.contains(s.lang)) {
      out.push_back({s.id, "lang '" + s.lang + "' not in dataset languages"});
    }
    for (const auto& [name, value] : s.attrs) {
      const AttributeSpec* spec = dataset.FindAttribute(name);
      if (spec == nullptr) {
        out.push_back({s.id, "attribute '" + name + "' has no spec"});
      } else if (std::find(spec->values.begin(), spec->values.end(), value) ==
                 spec->values.end()) {
        out.push_back({s.id, "attribute '" + name + "' value '" + value +
                                 "' not admissible"});
      }
    }
    for (const auto& spec : dataset.attribute_specs) {
      if (!s.attrs.contains(spec.name)) {
        out.push_back({s.id, "attribute '" + spec.name + "' missing"});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

template <typename Pred>
Dataset FilterSamples(const Dataset& dataset, Pred keep) {
  Dataset out;
  out.num_classes = dataset.num_classes;
  out.languages = dataset.languages;
  out.attribute_specs = dataset.attribute_specs;
  out.max_len = dataset.max_len;
  for (const auto& s : dataset.samples) {
    if (keep(s)) out.samples.push_back(s);
  }
  return out;
}

}  // namespace

Dataset FilterSplit(const Dataset& dataset, const std::string& split) {
  return FilterSamples(dataset,
                       [&](const Sample& s) { return s.split == split; });
}

Dataset FilterLanguage(const Dataset& dataset, const std::string& lang) {
  return FilterSamples(dataset, [&](const Sample& s) { return s.lang == lang; });
}

}  // namespace fairmt
