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

#include "fairmt/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace fairmt {

void CorpusSpec::Validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("corpus spec: " + msg);
  };
  auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (languages.empty()) fail("no languages");
  std::set<std::string> codes;
  for (const auto& l : languages) {
    if (l.code.empty()) fail("empty language code");
    if (!codes.insert(l.code).second) fail("duplicate language " + l.code);
    if (l.samples < 1) fail("language " + l.code + " needs >= 1 sample");
    if (!is_prob(l.positive_rate)) fail("positive_rate outside [0,1]");
  }
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (positive_class < 0 || positive_class >= num_classes) {
    fail("positive_class outside [0, num_classes)");
  }
  for (const auto& a : attributes) {
    if (a.spec.values.size() < 2) fail("attribute needs >= 2 values");
    if (std::set<std::string>(a.spec.values.begin(), a.spec.values.end())
            .size() != a.spec.values.size()) {
      fail("attribute values must be distinct");
    }
    if (a.probs.size() != a.spec.values.size()) {
      fail("attribute '" + a.spec.name + "' needs one probability per value");
    }
    double sum = 0.0;
    for (double p : a.probs) {
      if (!is_prob(p)) fail("attribute probability outside [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("attribute probabilities must sum to 1");
    if (a.disadvantaged < 0 ||
        a.disadvantaged >= static_cast<int>(a.spec.values.size())) {
      fail("disadvantaged index out of range");
    }
  }
  if (vocab_per_language < 1) fail("vocab_per_language must be >= 1");
  if (signal_tokens_per_class < 1) fail("signal_tokens_per_class must be >= 1");
  const int fixed = static_cast<int>(attributes.size()) + 1;
  if (min_tokens < fixed || max_tokens < min_tokens) {
    fail("token range must fit markers and a signal token");
  }
  if (!is_prob(label_signal_strength) || !is_prob(bias_strength)) {
    fail("signal/bias strength outside [0,1]");
  }
  if (!is_prob(train_fraction) || !is_prob(dev_fraction) ||
      train_fraction + dev_fraction > 1.0) {
    fail("split fractions invalid");
  }
}

CorpusSpec DefaultCorpusSpec(double bias_strength, double size_scale) {
  if (!(size_scale > 0.0)) {
    throw std::invalid_argument("size_scale must be > 0");
  }
  auto n = [size_scale](int base) {
    return std::max(10, static_cast<int>(std::lround(base * size_scale)));
  };
  CorpusSpec spec;
  spec.languages = {{"en", n(8000), 0.37},
                    {"es", n(4000), 0.397},
                    {"it", n(4000), 0.195},
                    {"pl", n(6000), 0.089},
                    {"pt", n(600), 0.205}};
  spec.attributes = {
      {{"gender", {"male", "female"}}, {0.5, 0.5}, 1},
      {{"age", {"young", "old"}}, {0.5, 0.5}, 1},
  };
  spec.bias_strength = bias_strength;
  return spec;
}

CorpusSpec SeparableCorpusSpec() {
  CorpusSpec spec;
  spec.languages = {{"en", 200, 0.5}, {"it", 200, 0.5}};
  spec.attributes = {{{"gender", {"male", "female"}}, {0.5, 0.5}, 1}};
  spec.label_signal_strength = 1.0;
  spec.bias_strength = 0.0;
  return spec;
}

double PositiveProbability(const CorpusSpec& spec, const LanguageSpec& lang,
                           const std::vector<bool>& disadvantaged_flags) {
  const double shift = kBiasShiftScale * spec.bias_strength;
  // The advantaged baseline is lowered so the language's expected positive
  // rate stays at positive_rate whenever no clipping is needed.
  double expected_shift = 0.0;
  double p = 0.0;
  for (std::size_t a = 0; a < spec.attributes.size(); ++a) {
    const auto& attr = spec.attributes[a];
    expected_shift += shift * attr.probs[attr.disadvantaged];
    if (disadvantaged_flags[a]) p += shift;
  }
  p += std::max(0.0, lang.positive_rate - expected_shift);
  return std::min(p, 1.0);
}

namespace {

std::string Token(const std::string& lang, const std::string& body) {
  return lang + "_" + body;
}

}  // namespace

Dataset Generate(const CorpusSpec& spec, std::uint64_t seed) {
  spec.Validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Dataset ds;
  ds.num_classes = spec.num_classes;
  ds.max_len = std::max<std::size_t>(kDefaultMaxLen, spec.max_tokens);
  for (const auto& l : spec.languages) ds.languages.push_back(l.code);
  std::sort(ds.languages.begin(), ds.languages.end());
  for (const auto& a : spec.attributes) ds.attribute_specs.push_back(a.spec);

  for (const auto& lang : spec.languages) {
    std::vector<Sample> samples;
    samples.reserve(lang.samples);
    for (int i = 0; i < lang.samples; ++i) {
      Sample s;
      char id[64];
      std::snprintf(id, sizeof(id), "%s-%05d", lang.code.c_str(), i);
      s.id = id;
      s.lang = lang.code;

      std::vector<bool> disadvantaged;
      for (const auto& attr : spec.attributes) {
        std::discrete_distribution<int> pick(attr.probs.begin(),
                                             attr.probs.end());
        const int v = pick(rng);
        s.attrs[attr.spec.name] = attr.spec.values[v];
        disadvantaged.push_back(v == attr.disadvantaged);
        s.tokens.push_back(
            Token(lang.code, attr.spec.name + "_" + attr.spec.values[v]));
      }

      const double p_pos = PositiveProbability(spec, lang, disadvantaged);
      if (unit(rng) < p_pos) {
        s.label = spec.positive_class;
      } else {
        std::uniform_int_distribution<int> other(0, spec.num_classes - 2);
        const int c = other(rng);
        s.label = c >= spec.positive_class ? c + 1 : c;
      }

      std::uniform_int_distribution<int> length(spec.min_tokens,
                                                spec.max_tokens);
      const int n_tokens = length(rng);
      if (unit(rng) < spec.label_signal_strength) {
        std::uniform_int_distribution<int> which(
            0, spec.signal_tokens_per_class - 1);
        s.tokens.push_back(Token(lang.code, "c" + std::to_string(s.label) +
                                                "_" +
                                                std::to_string(which(rng))));
      }
      std::uniform_int_distribution<int> filler(0, spec.vocab_per_language - 1);
      while (static_cast<int>(s.tokens.size()) < n_tokens) {
        s.tokens.push_back(Token(lang.code, "w" + std::to_string(filler(rng))));
      }
      std::shuffle(s.tokens.begin(), s.tokens.end(), rng);
      samples.push_back(std::move(s));
    }

    std::vector<int> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n = static_cast<double>(samples.size());
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * n));
    const auto n_dev = static_cast<std::size_t>(std::llround(spec.dev_fraction * n));
    for (std::size_t r = 0; r < order.size(); ++r) {
      samples[order[r]].split =
          r < n_train ? "train" : (r < n_train + n_dev ? "dev" : "test");
    }
    for (auto& s : samples) ds.samples.push_back(std::move(s));
  }
  return ds;
}

std::vector<GroupRate> MeasureCorpusBias(const Dataset& dataset,
                                         const std::string& attribute,
                                         int positive) {
  const AttributeSpec* spec = dataset.FindAttribute(attribute);
  if (spec == nullptr) {
    throw std::invalid_argument("unknown attribute '" + attribute + "'");
  }
  std::vector<GroupRate> out;
  for (const auto& lang : dataset.languages) {
    for (const auto& value : spec->values) {
      GroupRate g;
      g.lang = lang;
      g.value = value;
      for (const auto& s : dataset.samples) {
        if (s.lang != lang) continue;
        auto it = s.attrs.find(attribute);
        if (it == s.attrs.end() || it->second != value) continue;
        ++g.count;
        if (s.label == positive) ++g.positives;
      }
      if (g.count > 0) {
        g.rate = static_cast<double>(g.positives) / static_cast<double>(g.count);
      }
      out.push_back(g);
    }
  }
  return out;
}

}  // namespace fairmt
