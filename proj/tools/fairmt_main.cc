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

// fairmt: generate corpora, train debiased classifiers, and evaluate
// multilingual fairness metrics.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairmt/io.h"
#include "fairmt/metrics.h"
#include "fairmt/synth.h"
#include "fairmt/trainer.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fairmt {
namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SplitData {
  Dataset train;
  std::map<std::string, Dataset> heldout;
  DatasetSchema schema;
};

SplitData LoadSplits(const fs::path& dir) {
  std::optional<DatasetSchema> schema;
  if (fs::exists(dir / "schema.json")) {
    try {
      schema = SchemaFromJson(json::parse(ReadFile(dir / "schema.json")));
    } catch (const json::exception& e) {
      throw DataError("schema.json: " + std::string(e.what()));
    }
  }
  if (!fs::exists(dir / "train.jsonl")) {
    throw DataError("missing " + (dir / "train.jsonl").string());
  }
  SplitData out;
  out.train = ReadSamples(dir / "train.jsonl", schema);
  if (!schema) schema = SchemaOf(out.train);
  out.schema = *schema;
  for (const char* split : {"dev", "test"}) {
    const fs::path path = dir / (std::string(split) + ".jsonl");
    if (fs::exists(path)) out.heldout[split] = ReadSamples(path, schema);
  }
  return out;
}

void RequireAttribute(const DatasetSchema& schema, const std::string& attr) {
  for (const auto& a : schema.attribute_specs) {
    if (a.name == attr) return;
  }
  throw UsageError("unknown attribute '" + attr + "'");
}

std::string Dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- gen

struct GenOptions {
  std::string spec_path;
  std::uint64_t seed = 1;
  std::string out;
};

int RunGen(const GenOptions& o) {
  CorpusSpec spec = DefaultCorpusSpec();
  if (!o.spec_path.empty()) {
    try {
      spec = CorpusSpecFromJson(json::parse(ReadFile(o.spec_path)));
    } catch (const json::exception& e) {
      throw DataError(o.spec_path + ": " + e.what());
    }
  }
  try {
    spec.Validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  const Dataset ds = Generate(spec, o.seed);
  const fs::path out(o.out);
  for (const char* split : {"train", "dev", "test"}) {
    WriteFileAtomic(out / (std::string(split) + ".jsonl"),
                    EmitSamples(FilterSplit(ds, split).samples));
  }
  WriteFileAtomic(out / "schema.json", Dump(SchemaToJson(SchemaOf(ds))));
  WriteFileAtomic(out / "config.json",
                  Dump({{"command", "gen"},
                        {"seed", o.seed},
                        {"spec", CorpusSpecToJson(spec)}}));
  std::cout << "wrote " << ds.samples.size() << " samples to " << out.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string data;
  std::string mode = "merge";
  std::string attr = "gender";
  double alpha = 0.0;
  double beta = 0.0;
  double tau = 0.1;
  std::optional<double> tau_td;
  int epochs = 10;
  int batch_size = 32;
  double lr = 1e-2;
  std::uint64_t seed = 1;
  std::string sampler = "stratified";
  int positive = 1;
  int embed_dim = 32;
  int hidden_dim = 32;
  bool identity = false;
  std::string out;
};

TrainConfig MakeConfig(const TrainOptions& o) {
  TrainConfig c;
  try {
    c.mode = ParseTrainMode(o.mode);
    c.sampler = ParseSampler(o.sampler);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.attribute = o.attr;
  c.weights.alpha = o.alpha;
  c.weights.beta = o.beta;
  c.weights.tau = o.tau;
  c.weights.tau_td = o.tau_td;
  c.epochs = o.epochs;
  c.batch_size = o.batch_size;
  c.learning_rate = o.lr;
  c.seed = o.seed;
  c.positive = o.positive;
  c.dims.embed_dim = o.embed_dim;
  c.dims.hidden_dim = o.hidden_dim;
  c.dims.identity = o.identity;
  try {
    c.Validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

int RunTrain(const TrainOptions& o) {
  const TrainConfig config = MakeConfig(o);
  const SplitData data = LoadSplits(o.data);
  RequireAttribute(data.schema, config.attribute);
  if (config.positive < 0 || config.positive >= data.schema.num_classes) {
    throw UsageError("positive class outside [0, num_classes)");
  }

  const TrainResult result = RunExperiment(data.train, data.heldout, config);
  const fs::path out(o.out);
  json config_json = TrainConfigToJson(config);
  config_json["command"] = "train";
  config_json["data"] = o.data;
  WriteFileAtomic(out / "config.json", Dump(config_json));

  std::string history;
  for (const auto& model : result.models) {
    for (std::size_t e = 0; e < model.history.epochs.size(); ++e) {
      json line = EpochStatsToJson(model.history.epochs[e]);
      line["epoch"] = e + 1;
      if (!model.language.empty()) line["language"] = model.language;
      history += line.dump() + "\n";
    }
    const std::string name = model.language.empty()
                                 ? "checkpoint.txt"
                                 : "checkpoint_" + model.language + ".txt";
    WriteFileAtomic(out / name, EmitCheckpoint(model.params));
  }
  WriteFileAtomic(out / "history.jsonl", history);

  const AttributeSpec* attr = data.train.FindAttribute(config.attribute);
  for (const auto& [split, ds] : data.heldout) {
    if (ds.samples.empty()) continue;
    const auto records = Evaluate(result, ds, config.positive);
    WriteFileAtomic(out / ("predictions_" + split + ".jsonl"),
                    EmitPredictions(records));
    const MetricReport report =
        FullReport(records, *attr, config.positive, ds.languages);
    WriteFileAtomic(out / ("report_" + split + ".json"),
                    EmitReport(MakeReportFile(report, config_json)));
  }

  const auto& last = result.models.front().history;
  if (!last.epochs.empty()) {
    const EpochStats& s = last.epochs.back();
    std::printf("final epoch: total %.6g  lf %.6g  td %.6g  ce %.6g\n",
                s.total, s.l_lf, s.l_td, s.l_ce);
  }
  auto test = last.final_reports.find("test");
  if (test != last.final_reports.end()) {
    const MetricReport& r = test->second;
    std::printf("test: macro_f_avg %.4f  med_avg %s  mued %s  mepd %.4f\n",
                r.macro_f_avg,
                r.med_avg ? std::to_string(*r.med_avg).c_str() : "-",
                r.mued.value ? std::to_string(*r.mued.value).c_str() : "-",
                r.mepd);
  }
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string pred;
  std::string attr;
  int positive = 1;
  std::vector<std::string> languages;
  std::string out;
};

int RunEval(const EvalOptions& o) {
  const auto records = ReadPredictions(o.pred);
  if (records.empty()) throw DataError(o.pred + ": no prediction records");
  std::set<std::string> values;
  bool seen = false;
  for (const auto& r : records) {
    auto it = r.attrs.find(o.attr);
    if (it == r.attrs.end()) continue;
    seen = true;
    values.insert(it->second);
  }
  if (!seen) throw UsageError("unknown attribute '" + o.attr + "'");
  const AttributeSpec spec{o.attr, {values.begin(), values.end()}};
  const MetricReport report = FullReport(records, spec, o.positive, o.languages);
  const json config = {{"command", "eval"},
                       {"pred", o.pred},
                       {"attr", o.attr},
                       {"positive", o.positive},
                       {"languages", o.languages}};
  const ReportFile file = MakeReportFile(report, config);
  WriteFileAtomic(o.out, EmitReport(file));
  const MetricReport& r = file.report;
  std::cout << "med_avg " << (r.med_avg ? std::to_string(*r.med_avg) : "-")
            << "  mued "
            << (r.mued.value ? std::to_string(*r.mued.value) : "-")
            << "  mepd " << r.mepd << "\n";
  return 0;
}

// ---------------------------------------------------------------- compare

struct CompareOptions {
  std::vector<std::string> baseline;
  std::vector<std::string> debiased;
  std::vector<std::string> attrs;
  bool literal = false;
  std::string out;
};

std::map<std::string, double> MedByAttribute(
    const std::vector<std::string>& paths) {
  std::map<std::string, double> out;
  for (const auto& p : paths) {
    const ReportFile file = ParseReport(ReadFile(p));
    if (!file.report.med_avg) {
      throw DataError(p + ": med_avg is undefined");
    }
    if (!out.emplace(file.report.attribute, *file.report.med_avg).second) {
      throw UsageError("two reports for attribute '" + file.report.attribute +
                       "'");
    }
  }
  return out;
}

int RunCompare(const CompareOptions& o) {
  const auto base_all = MedByAttribute(o.baseline);
  const auto debiased_all = MedByAttribute(o.debiased);
  std::map<std::string, double> base, debiased;
  for (const auto& a : o.attrs) {
    auto b = base_all.find(a);
    auto d = debiased_all.find(a);
    if (b == base_all.end() || d == debiased_all.end()) {
      throw UsageError("no baseline/debiased report pair for attribute '" + a +
                       "'");
    }
    base[a] = b->second;
    debiased[a] = d->second;
  }
  const SdMode mode = o.literal ? SdMode::kLiteralMin : SdMode::kClipPositive;
  const double sd = StrategyDestructiveness(base, debiased, mode);
  json per_attr = json::object();
  for (const auto& [a, v] : base) {
    per_attr[a] = {{"baseline_med", v},
                   {"debiased_med", debiased[a]},
                   {"delta", RoundSignificant(debiased[a] - v)}};
  }
  const json result = {
      {"sd", RoundSignificant(sd)},
      {"sd_mode", o.literal ? "literal-min" : "clip-positive"},
      {"per_attribute", per_attr},
      {"config",
       {{"command", "compare"},
        {"baseline", o.baseline},
        {"debiased", o.debiased},
        {"attrs", o.attrs},
        {"sd_literal", o.literal}}}};
  if (!o.out.empty()) WriteFileAtomic(o.out, Dump(result));
  std::cout << Dump(result);
  return 0;
}

// ---------------------------------------------------------------- search

struct SearchOptions {
  TrainOptions train;
  int trials = 8;
  std::uint64_t search_seed = 1;
  double floor = 0.05;
};

int RunSearch(const SearchOptions& o) {
  if (o.trials < 1) throw UsageError("--trials must be >= 1");
  const TrainConfig base = MakeConfig(o.train);
  const SplitData data = LoadSplits(o.train.data);
  RequireAttribute(data.schema, base.attribute);
  const Dataset* heldout = nullptr;
  for (const char* split : {"dev", "test"}) {
    auto it = data.heldout.find(split);
    if (it != data.heldout.end() && !it->second.samples.empty()) {
      heldout = &it->second;
      break;
    }
  }
  if (heldout == nullptr) throw DataError("search needs a dev or test split");

  const SearchResult result = RandomSearch(data.train, *heldout, base,
                                           o.trials, o.search_seed, o.floor);
  json trials = json::array();
  std::printf("%5s %8s %8s %8s %10s %10s %8s\n", "trial", "alpha", "beta",
              "tau", "macro_f", "med_avg", "feasible");
  for (const auto& t : result.trials) {
    const auto med = t.report.med_avg;
    trials.push_back({{"index", t.index},
                      {"alpha", RoundSignificant(t.weights.alpha)},
                      {"beta", RoundSignificant(t.weights.beta)},
                      {"tau", RoundSignificant(t.weights.tau)},
                      {"macro_f_avg", RoundSignificant(t.report.macro_f_avg)},
                      {"med_avg", med ? json(RoundSignificant(*med)) : json()},
                      {"feasible", t.feasible}});
    std::printf("%5d %8.4f %8.4f %8.4f %10.4f %10s %8s\n", t.index,
                t.weights.alpha, t.weights.beta, t.weights.tau,
                t.report.macro_f_avg,
                med ? std::to_string(*med).c_str() : "-",
                t.feasible ? "yes" : "no");
  }
  json best = TrainConfigToJson(result.best);
  const json summary = {
      {"best_index", result.best_index},
      {"fallback", result.fallback},
      {"best_config", best},
      {"baseline",
       {{"macro_f_avg", RoundSignificant(result.baseline.macro_f_avg)},
        {"med_avg", result.baseline.med_avg
                        ? json(RoundSignificant(*result.baseline.med_avg))
                        : json()}}},
      {"trials", trials},
      {"config",
       {{"command", "search"},
        {"data", o.train.data},
        {"trials", o.trials},
        {"seed", o.search_seed},
        {"macro_f_floor", o.floor},
        {"base", TrainConfigToJson(base)}}}};
  std::printf("best trial %d%s: alpha %.4f beta %.4f tau %.4f\n",
              result.best_index, result.fallback ? " (fallback)" : "",
              result.best.weights.alpha, result.best.weights.beta,
              result.best.weights.tau);
  if (!o.train.out.empty()) {
    WriteFileAtomic(fs::path(o.train.out) / "search.json", Dump(summary));
  }
  return 0;
}

void AddTrainFlags(CLI::App* cmd, TrainOptions& o, bool with_weights) {
  cmd->add_option("--data", o.data, "Directory with train/dev/test .jsonl")
      ->required();
  cmd->add_option("--mode", o.mode, "merge | individual")
      ->check(CLI::IsMember({"merge", "individual"}));
  cmd->add_option("--attr", o.attr, "Sensitive attribute under debiasing");
  if (with_weights) {
    cmd->add_option("--alpha", o.alpha, "Language-fusion loss weight");
    cmd->add_option("--beta", o.beta, "Text-debiasing loss weight");
    cmd->add_option("--tau", o.tau, "Contrastive temperature");
    cmd->add_option("--tau-td", o.tau_td,
                    "Temperature of the debiasing term (default: --tau)");
  }
  cmd->add_option("--epochs", o.epochs);
  cmd->add_option("--batch-size", o.batch_size);
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--sampler", o.sampler, "stratified | uniform")
      ->check(CLI::IsMember({"stratified", "uniform"}));
  cmd->add_option("--positive", o.positive, "Positive class index");
  cmd->add_option("--embed-dim", o.embed_dim);
  cmd->add_option("--hidden-dim", o.hidden_dim);
  cmd->add_flag("--identity-encoder", o.identity,
                "Use mean-pooled embeddings without projection");
}

int Main(int argc, char** argv) {
  CLI::App app{"Fairness evaluation and contrastive debiasing for "
               "multilingual text classifiers"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen_cmd->add_option("--spec", gen.spec_path,
                      "Corpus spec JSON (default corpus when omitted)");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier");
  AddTrainFlags(train_cmd, train, true);
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_option("--out", train.out, "Run directory")->required();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Compute a metric report");
  eval_cmd->add_option("--pred", eval.pred, "Predictions .jsonl")
      ->required();
  eval_cmd->add_option("--attr", eval.attr, "Sensitive attribute")->required();
  eval_cmd->add_option("--positive", eval.positive, "Positive class index");
  eval_cmd->add_option("--languages", eval.languages,
                       "Languages to report (default: all present)");
  eval_cmd->add_option("--out", eval.out, "Report path")->required();

  CompareOptions compare;
  auto* compare_cmd = app.add_subcommand(
      "compare", "Strategy destructiveness between report sets");
  compare_cmd->add_option("--baseline", compare.baseline)
      ->required();
  compare_cmd->add_option("--debiased", compare.debiased)
      ->required();
  compare_cmd->add_option("--attrs", compare.attrs, "Other attributes")
      ->required()
      ->delimiter(',');
  compare_cmd->add_flag("--sd-literal", compare.literal,
                        "Use min(delta, 0) instead of max(delta, 0)");
  compare_cmd->add_option("--out", compare.out, "Also write the result here");

  SearchOptions search;
  auto* search_cmd =
      app.add_subcommand("search", "Random search over loss weights");
  AddTrainFlags(search_cmd, search.train, false);
  search_cmd->add_option("--trials", search.trials);
  search_cmd->add_option("--seed", search.search_seed);
  search_cmd->add_option("--train-seed", search.train.seed);
  search_cmd->add_option("--macro-f-floor", search.floor,
                         "Allowed macro-F drop vs the unweighted baseline");
  search_cmd->add_option("--out", search.train.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*gen_cmd) return RunGen(gen);
    if (*train_cmd) return RunTrain(train);
    if (*eval_cmd) return RunEval(eval);
    if (*compare_cmd) return RunCompare(compare);
    if (*search_cmd) return RunSearch(search);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace fairmt

int main(int argc, char** argv) { return fairmt::Main(argc, argv); }
