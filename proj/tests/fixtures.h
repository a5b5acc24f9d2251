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


// Prediction fixtures whose per-language MED and macro-F are exactly (or to
// within 1e-6) published reference values, so the `eval` command can be
// checked against them end to end.

#ifndef FAIRMT_TESTS_FIXTURES_H_
#define FAIRMT_TESTS_FIXTURES_H_

#include <cmath>
#include <string>
#include <vector>

#include "fairmt/types.h"

namespace fairmt::testing {

// With n negatives in each of two groups, MED = |fp_a - fp_b| / n exactly.
struct LanguageTarget {
  std::string lang;
  int negatives_per_group;
  int fp_gap;
  double macro_f;
};

inline const std::vector<LanguageTarget>& ReferenceTargets() {
  static const std::vector<LanguageTarget> targets = {
      {"en", 5000, 491, 0.8513},  // MED 0.0982
      {"es", 400, 9, 0.6517},     // MED 0.0225
      {"it", 625, 32, 0.7158},    // MED 0.0512
      {"pl", 5000, 293, 0.6440},  // MED 0.0586
      {"pt", 2500, 573, 0.5479},  // MED 0.2292
  };
  return targets;
}

inline double BinaryMacroF(double tp, double fp, double fn, double tn) {
  const double f_pos = 2 * tp / (2 * tp + fp + fn);
  const double f_neg = 2 * tn / (2 * tn + fn + fp);
  return 0.5 * (f_pos + f_neg);
}

// Builds one language's records: the false-positive split fixes MED, and a
// grid search over (false positives, positives, true positives) matches the
// macro-F target. Macro-F is increasing in true positives, so that axis is
// bisected.
inline std::vector<PredictionRecord> LanguageFixture(const LanguageTarget& t) {
  const int n = t.negatives_per_group;
  int best_fp_a = 0, best_p = 0, best_tp = 0;
  double best_err = 1e9;
  for (int p = 100; p <= 3000 && best_err > 1e-7; p += 20) {
    for (int fp_a = 0; fp_a + t.fp_gap <= n && best_err > 1e-7; ++fp_a) {
      const int fp = 2 * fp_a + t.fp_gap;
      const int tn = 2 * n - fp;
      int lo = 0, hi = p;
      while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (BinaryMacroF(mid, fp, p - mid, tn) < t.macro_f) {
          lo = mid + 1;
        } else {
          hi = mid;
        }
      }
      for (int tp : {lo - 1, lo}) {
        if (tp < 0 || tp > p) continue;
        const double err = std::fabs(BinaryMacroF(tp, fp, p - tp, tn) - t.macro_f);
        if (err < best_err) {
          best_err = err;
          best_fp_a = fp_a;
          best_p = p;
          best_tp = tp;
        }
      }
    }
  }
  std::vector<PredictionRecord> out;
  auto add = [&](const std::string& group, int gold, int pred) {
    PredictionRecord r;
    r.id = t.lang + "-" + std::to_string(out.size());
    r.lang = t.lang;
    r.attrs["gender"] = group;
    r.gold = gold;
    r.pred = pred;
    r.score = pred == 1 ? 0.9 : 0.1;
    out.push_back(r);
  };
  const int fp_b = best_fp_a + t.fp_gap;
  for (int i = 0; i < n; ++i) add("male", 0, i < best_fp_a ? 1 : 0);
  for (int i = 0; i < n; ++i) add("female", 0, i < fp_b ? 1 : 0);
  for (int i = 0; i < best_p; ++i) add(i % 2 ? "male" : "female", 1, i < best_tp ? 1 : 0);
  return out;
}

inline std::vector<PredictionRecord> ReferencePredictionFixture() {
  std::vector<PredictionRecord> all;
  for (const auto& t : ReferenceTargets()) {
    auto part = LanguageFixture(t);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace fairmt::testing

#endif  // FAIRMT_TESTS_FIXTURES_H_
