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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fairmt/contrastive.h"
#include "fairmt/encoder.h"
#include "fairmt/io.h"
#include "fairmt/metrics.h"
#include "fairmt/synth.h"
#include "fairmt/trainer.h"
#include "oracles.h"

namespace fairmt {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string Fmt(const char* format, double a, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

// Largest |a - b|; a definedness mismatch counts as infinite.
struct MaxDiff {
  double worst = 0.0;
  void Add(double a, double b) { worst = std::max(worst, std::fabs(a - b)); }
  void Add(const std::optional<double>& a, const std::optional<double>& b) {
    if (a.has_value() != b.has_value()) {
      worst = INFINITY;
    } else if (a) {
      Add(*a, *b);
    }
  }
};

// ---------------------------------------------------------------- 1

Outcome ReferenceAnchors() {
  const double mepd = Mepd({{"en", 0.8513},
                            {"it", 0.6517},
                            {"pl", 0.7158},
                            {"pt", 0.6440},
                            {"es", 0.5479}});
  const double med = MedAggregate({{"en", 0.0982},
                                   {"it", 0.0225},
                                   {"pl", 0.0512},
                                   {"pt", 0.0586},
                                   {"es", 0.2292}});
  const std::map<std::string, double> base{
      {"gender", 0.0645}, {"ethnicity", 0.0278}, {"country", 0.0562}};
  auto sd = [&](double g, double e, double c) {
    return StrategyDestructiveness(
        base, {{"gender", g}, {"ethnicity", e}, {"country", c}});
  };
  const double fgm = sd(0.0685, 0.0886, 0.1065);
  const double pgd = sd(0.0763, 0.0426, 0.1062);
  const double sent = sd(0.0286, 0.0300, 0.0266);
  const bool ok = std::fabs(mepd - 0.0811) <= 1e-4 &&
                  std::fabs(med - 0.0919) <= 1e-4 &&
                  std::fabs(fgm - 0.0383) <= 1e-4 &&
                  std::fabs(pgd - 0.0255) <= 1e-4 &&
                  std::fabs(sent - 0.0007) <= 1e-4;
  return {ok, Fmt("MEPD %.6f, mean MED %.6f, ", mepd, med) +
                  Fmt("SD FGM %.6f PGD %.6f SentBias %.6f", fgm, pgd, sent)};
}

// ---------------------------------------------------------------- 2

Outcome MetricOracles() {
  std::mt19937_64 rng(20240601);
  const AttributeSpec attr{"g", {"a", "b"}};
  MaxDiff diff;
  for (int set = 0; set < 100; ++set) {
    const int langs = 2 + set % 4;
    std::uniform_int_distribution<int> size(langs, 200);
    const auto records = testing::RandomRecords(rng, size(rng), langs);
    const MetricReport report = FullReport(records, attr, 1);

    std::vector<double> macro;
    std::vector<double> meds;
    for (const auto& [lang, block] : report.per_language) {
      const auto sub = testing::OfLanguage(records, lang);
      const auto oracle = testing::NaivePerf(sub, 1);
      diff.Add(block.performance.accuracy, oracle.accuracy);
      diff.Add(block.performance.macro_f, oracle.macro_f);
      diff.Add(block.performance.weighted_f, oracle.weighted_f);
      diff.Add(block.performance.auc, oracle.auc);
      const auto med = testing::NaiveGap(sub, "g", attr.values, 1);
      diff.Add(block.med.value, med);
      macro.push_back(oracle.macro_f);
      if (med) meds.push_back(*med);
    }
    std::optional<double> med_avg;
    if (!meds.empty()) {
      med_avg = 0.0;
      for (double m : meds) *med_avg += m / meds.size();
    }
    diff.Add(report.med_avg, med_avg);
    diff.Add(report.mepd, testing::NaiveMepd(macro));
    diff.Add(report.mued.value, testing::NaiveGap(records, "g", attr.values, 1));
    const auto overall = testing::NaivePerf(records, 1);
    diff.Add(report.overall.accuracy, overall.accuracy);
    diff.Add(report.overall.macro_f, overall.macro_f);
    diff.Add(report.overall.weighted_f, overall.weighted_f);
    diff.Add(report.overall.auc, overall.auc);
  }
  return {diff.worst <= 1e-10,
          Fmt("100 prediction sets, max |library - brute force| = %.3g",
              diff.worst)};
}

// ---------------------------------------------------------------- 3

Outcome ContrastiveOracles() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> lang(0, 2);
  MaxDiff diff;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 7;
    const int h = 1 + (trial * 5) % 8;
    BatchView b;
    b.reps.resize(n, h);
    std::vector<std::vector<double>> reps(n, std::vector<double>(h));
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < h; ++d) b.reps(i, d) = reps[i][d] = normal(rng);
      b.labels.push_back(coin(rng));
      b.langs.push_back("l" + std::to_string(lang(rng)));
      b.attr_values.push_back(coin(rng) ? "m" : "f");
    }
    const double tau = 0.05 + 0.02 * trial;
    const auto lf = testing::NaivePositiveSets(b.labels, b.langs);
    const auto td = testing::NaivePositiveSets(b.labels, b.attr_values);
    diff.Add(ContrastiveLoss(b, PositiveSetsLf(b), tau),
             testing::NaiveContrastive(reps, lf, tau));
    diff.Add(ContrastiveLoss(b, PositiveSetsTd(b), tau),
             testing::NaiveContrastive(reps, td, tau));
  }

  // Identical embeddings: every softmax term is 1/(N-1).
  MaxDiff uniform;
  for (int n = 3; n <= 8; ++n) {
    BatchView b;
    b.reps = RowMatrix::Constant(n, 4, 0.7);
    std::size_t total_positives = 0;
    for (int i = 0; i < n; ++i) {
      b.labels.push_back(coin(rng));
      b.langs.push_back("l" + std::to_string(lang(rng)));
      b.attr_values.push_back("m");
    }
    const auto sets = PositiveSetsLf(b);
    for (const auto& s : sets) total_positives += s.size();
    uniform.Add(ContrastiveLoss(b, sets, 0.1),
                static_cast<double>(total_positives) * std::log(n - 1.0) / n);
  }
  return {diff.worst <= 1e-10 && uniform.worst <= 1e-12,
          Fmt("50 batches, max |library - naive| = %.3g; uniform case max "
              "error %.3g",
              diff.worst, uniform.worst)};
}

// ---------------------------------------------------------------- 4

Outcome GradientCheck() {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> normal(0.0, 0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::string> tokens;
  for (int t = 0; t < 8; ++t) tokens.push_back("w" + std::to_string(t));
  const Vocab vocab = Vocab::FromTokens(tokens);
  double worst = 0.0;
  const int configs = 24;
  for (int c = 0; c < configs; ++c) {
    const bool identity = c % 6 == 5;
    const int e = 1 + c % 8;
    const int h = identity ? e : 1 + (c * 3) % 8;
    const int k = 2 + c % 3;
    const int n = 2 + c % 5;
    EncoderParams params = InitParams(vocab, {e, h, k, identity}, rng());
    Vector flat = params.blocks.Flatten();
    for (Eigen::Index j = 0; j < flat.size(); ++j) flat(j) += normal(rng);
    if (identity) {
      // Keep the (unused) projection at its identity initialization.
      params.blocks.Unflatten(flat);
      params.blocks.projection = RowMatrix::Identity(h, e);
      flat = params.blocks.Flatten();
    }
    params.blocks.Unflatten(flat);

    std::vector<BatchExample> batch(n);
    std::uniform_int_distribution<int> tok(0, vocab.size() - 1);
    std::uniform_int_distribution<int> len(1, 4);
    std::uniform_int_distribution<int> cls(0, k - 1);
    for (auto& ex : batch) {
      const int l = len(rng);
      for (int t = 0; t < l; ++t) ex.token_ids.push_back(tok(rng));
      ex.label = cls(rng) % 2;
      ex.lang = unit(rng) < 0.5 ? "en" : "it";
      ex.attr_value = unit(rng) < 0.5 ? "m" : "f";
    }
    LossWeights w;
    switch (c % 4) {
      case 0: break;  // classification only
      case 1: w.alpha = 0.5; w.beta = 0.5; break;  // no classification term
      default:
        w.alpha = 0.7 * unit(rng);
        w.beta = (1.0 - w.alpha) * unit(rng);
    }
    w.tau = 0.1 + unit(rng);
    if (c % 3 == 0) w.tau_td = 0.1 + unit(rng);

    const LossBreakdown out = LossAndGradient(batch, params, w);
    const double step = 1e-5;
    for (Eigen::Index j = 0; j < flat.size(); ++j) {
      Vector x = flat;
      x(j) = flat(j) + step;
      params.blocks.Unflatten(x);
      const double up = LossAndGradient(batch, params, w).total;
      x(j) = flat(j) - step;
      params.blocks.Unflatten(x);
      const double down = LossAndGradient(batch, params, w).total;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = out.gradient(j);
      // Relative error with a 1e-6 floor so exactly-zero entries compare
      // absolutely.
      const double scale =
          std::max({std::fabs(numeric), std::fabs(analytic), 1e-6});
      worst = std::max(worst, std::fabs(numeric - analytic) / scale);
    }
    params.blocks.Unflatten(flat);
  }
  return {worst < 1e-4, Fmt("%.0f configurations, max relative error %.3g",
                            configs, worst)};
}

// ---------------------------------------------------------------- 5 & 6

struct RunSummary {
  double med_avg = 0.0;
  double macro_f = 0.0;
  double mepd = 0.0;
  bool loss_down = false;
  double seconds = 0.0;
};

RunSummary TrainOnDefaultCorpus(std::uint64_t seed, double alpha, double beta) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset corpus = Generate(DefaultCorpusSpec(), seed);
  TrainConfig config;
  config.seed = seed;
  config.weights.alpha = alpha;
  config.weights.beta = beta;
  config.weights.tau = 0.1;
  const TrainResult result =
      RunExperiment(FilterSplit(corpus, "train"),
                    {{"test", FilterSplit(corpus, "test")}}, config);
  const TrainHistory& history = result.models.front().history;
  const MetricReport& report = history.final_reports.at("test");
  RunSummary s;
  s.med_avg = report.med_avg.value_or(NAN);
  s.macro_f = report.macro_f_avg;
  s.mepd = report.mepd;
  s.loss_down = history.epochs.back().total < history.epochs.front().total;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();
  return s;
}

struct EndToEnd {
  std::vector<RunSummary> baseline, debiased, fusion;
};

EndToEnd RunEndToEnd() {
  EndToEnd out;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    out.baseline.push_back(TrainOnDefaultCorpus(seed, 0.0, 0.0));
    out.debiased.push_back(TrainOnDefaultCorpus(seed, 0.2, 0.3));
    out.fusion.push_back(TrainOnDefaultCorpus(seed, 0.3, 0.0));
  }
  return out;
}

template <typename Field>
double MedianOf(const std::vector<RunSummary>& runs, Field field) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(field(r));
  return Median(v);
}

double SlowestRun(const EndToEnd& e) {
  double worst = 0.0;
  for (const auto* runs : {&e.baseline, &e.debiased, &e.fusion}) {
    for (const auto& r : *runs) worst = std::max(worst, r.seconds);
  }
  return worst;
}

Outcome Debiasing(const EndToEnd& e) {
  const double base_med = MedianOf(e.baseline, [](auto& r) { return r.med_avg; });
  const double deb_med = MedianOf(e.debiased, [](auto& r) { return r.med_avg; });
  const double base_f = MedianOf(e.baseline, [](auto& r) { return r.macro_f; });
  const double deb_f = MedianOf(e.debiased, [](auto& r) { return r.macro_f; });
  const double reduction = 1.0 - deb_med / base_med;
  const bool ok = reduction >= 0.20 && base_f - deb_f <= 0.05 &&
                  SlowestRun(e) < 300.0;
  return {ok, Fmt("median med_avg %.4f -> %.4f (%.1f%% lower), ", base_med,
                  deb_med, 100.0 * reduction) +
                  Fmt("median macro-F %.4f -> %.4f; slowest run %.1fs", base_f,
                      deb_f, SlowestRun(e))};
}

Outcome LanguageFusion(const EndToEnd& e) {
  const double base = MedianOf(e.baseline, [](auto& r) { return r.mepd; });
  const double fused = MedianOf(e.fusion, [](auto& r) { return r.mepd; });
  int down = 0;
  for (const auto& r : e.fusion) down += r.loss_down;
  return {fused <= base && down >= 4,
          Fmt("median MEPD %.4f -> %.4f; epoch-10 loss below epoch-1 for %.0f/5 "
              "seeds",
              base, fused, down)};
}

// ---------------------------------------------------------------- 7

int RunCli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" FAIRMT_CLI_PATH "' " +
                          args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> Tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files[fs::relative(e.path(), dir).string()] = ReadFile(e.path());
    }
  }
  return files;
}

Outcome Determinism() {
  const fs::path dir = fs::temp_directory_path() /
                       ("fairmt_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  struct Step {
    std::string label;
    std::string args;  // "%" is replaced by the output name
    std::string out;
  };
  const std::vector<Step> steps = {
      {"gen", "gen --seed 7 --out %", "corpus"},
      {"train merge", "train --data corpus --alpha 0.2 --beta 0.3 --seed 7 --out %",
       "run"},
      {"train individual",
       "train --data corpus --mode individual --alpha 0.3 --epochs 3 --seed 7 --out %",
       "ind"},
      {"eval",
       "eval --pred run/predictions_test.jsonl --attr gender --positive 1 --out %",
       "report.json"},
  };
  std::string detail;
  bool ok = true;
  for (const auto& step : steps) {
    std::map<std::string, std::string> first;
    bool same = true;
    for (int rep = 0; rep < 3; ++rep) {
      // The third repetition uses several OpenMP threads.
      const std::string out = rep == 0 ? step.out : step.out + "_" + std::to_string(rep);
      std::string args = step.args;
      args.replace(args.find('%'), 1, out);
      if (rep == 2) args = "--threads 4 " + args;
      if (RunCli(dir, args) != 0) {
        same = false;
        break;
      }
      const fs::path path = dir / out;
      const auto files = fs::is_directory(path)
                             ? Tree(path)
                             : std::map<std::string, std::string>{
                                   {"", ReadFile(path)}};
      if (rep == 0) {
        first = files;
      } else {
        same = same && files == first && !files.empty();
      }
    }
    ok = ok && same;
    detail += step.label + (same ? " identical; " : " DIFFERS; ");
  }
  fs::remove_all(dir);
  detail += "(3 runs each, the last with 4 threads)";
  return {ok, detail};
}

// ----------------------------------------------------------------

int Main() {
  struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> check;
  };
  std::optional<EndToEnd> e2e;
  auto end_to_end = [&]() -> const EndToEnd& {
    if (!e2e) e2e = RunEndToEnd();
    return *e2e;
  };
  const std::vector<Criterion> criteria = {
      {1, "reference metric anchors", ReferenceAnchors},
      {2, "metric oracle equivalence", MetricOracles},
      {3, "contrastive loss equivalence", ContrastiveOracles},
      {4, "gradient correctness", GradientCheck},
      {5, "end-to-end debiasing direction", [&] { return Debiasing(end_to_end()); }},
      {6, "language-fusion effect", [&] { return LanguageFusion(end_to_end()); }},
      {7, "determinism", Determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& ex) {
      outcome = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    failures += !outcome.pass;
    std::printf("criterion %d (%s): %s - %s [%.2fs]\n", c.id, c.name.c_str(),
                outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace fairmt

int main() { return fairmt::Main(); }
