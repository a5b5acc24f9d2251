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

#include "fairmt/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace fairmt {

using nlohmann::json;

void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DatasetSchema SchemaOf(const Dataset& dataset) {
  return {dataset.num_classes, dataset.languages, dataset.attribute_specs,
          dataset.max_len};
}

json SchemaToJson(const DatasetSchema& schema) {
  json specs = json::array();
  for (const auto& a : schema.attribute_specs) {
    specs.push_back({{"name", a.name}, {"values", a.values}});
  }
  return {{"num_classes", schema.num_classes},
          {"languages", schema.languages},
          {"attribute_specs", specs},
          {"max_len", schema.max_len}};
}

DatasetSchema SchemaFromJson(const json& j) {
  try {
    DatasetSchema s;
    s.num_classes = j.at("num_classes").get<int>();
    s.languages = j.at("languages").get<std::vector<std::string>>();
    for (const auto& a : j.at("attribute_specs")) {
      s.attribute_specs.push_back(
          {a.at("name").get<std::string>(),
           a.at("values").get<std::vector<std::string>>()});
    }
    s.max_len = j.value("max_len", kDefaultMaxLen);
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad schema: ") + e.what());
  }
}

namespace {

// Each line of a JSON-lines file, with its 1-based line number. Blank lines
// are skipped.
template <typename Fn>
void ForEachJsonLine(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object()) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected a JSON object");
    }
    try {
      fn(j, line_no);
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

const json& Field(const json& j, const char* name, int line_no) {
  auto it = j.find(name);
  if (it == j.end()) {
    throw DataError("line " + std::to_string(line_no) + ": missing field '" +
                    name + "'");
  }
  return *it;
}

json OptionalToJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> OptionalFromJson(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string EmitSamples(const std::vector<Sample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    json j = {{"id", s.id},   {"tokens", s.tokens}, {"label", s.label},
              {"attrs", s.attrs}, {"lang", s.lang}};
    if (!s.split.empty()) j["split"] = s.split;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Dataset ParseSamples(const std::string& text,
                     const std::optional<DatasetSchema>& schema) {
  Dataset ds;
  ForEachJsonLine(text, [&](const json& j, int line_no) {
    Sample s;
    s.id = Field(j, "id", line_no).get<std::string>();
    s.tokens = Field(j, "tokens", line_no).get<std::vector<std::string>>();
    s.label = Field(j, "label", line_no).get<int>();
    s.lang = Field(j, "lang", line_no).get<std::string>();
    if (j.contains("attrs")) s.attrs = j.at("attrs").get<AttributeMap>();
    if (j.contains("split")) s.split = j.at("split").get<std::string>();
    ds.samples.push_back(std::move(s));
  });

  if (schema) {
    ds.num_classes = schema->num_classes;
    ds.languages = schema->languages;
    ds.attribute_specs = schema->attribute_specs;
    ds.max_len = schema->max_len;
  } else {
    int max_label = 1;
    std::set<std::string> langs;
    std::map<std::string, std::set<std::string>> values;
    for (const auto& s : ds.samples) {
      max_label = std::max(max_label, s.label);
      langs.insert(s.lang);
      for (const auto& [name, value] : s.attrs) values[name].insert(value);
    }
    ds.num_classes = max_label + 1;
    ds.languages.assign(langs.begin(), langs.end());
    for (const auto& [name, vs] : values) {
      ds.attribute_specs.push_back({name, {vs.begin(), vs.end()}});
    }
  }

  const auto violations = ValidateDataset(ds);
  if (!violations.empty()) {
    std::string msg = std::to_string(violations.size()) +
                      " validation violation(s):";
    for (const auto& v : violations) {
      msg += "\n  " + (v.sample_id.empty() ? "<dataset>" : v.sample_id) +
             ": " + v.rule;
    }
    throw DataError(msg);
  }
  return ds;
}

Dataset ReadSamples(const std::filesystem::path& path,
                    const std::optional<DatasetSchema>& schema) {
  try {
    return ParseSamples(ReadFile(path), schema);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string EmitPredictions(const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j = {{"id", r.id},     {"lang", r.lang}, {"attrs", r.attrs},
              {"gold", r.gold}, {"pred", r.pred}, {"score", r.score}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<PredictionRecord> ParsePredictions(const std::string& text) {
  std::vector<PredictionRecord> records;
  ForEachJsonLine(text, [&](const json& j, int line_no) {
    PredictionRecord r;
    r.id = Field(j, "id", line_no).get<std::string>();
    r.lang = Field(j, "lang", line_no).get<std::string>();
    r.attrs = Field(j, "attrs", line_no).get<AttributeMap>();
    r.gold = Field(j, "gold", line_no).get<int>();
    r.pred = Field(j, "pred", line_no).get<int>();
    r.score = Field(j, "score", line_no).get<double>();
    if (!std::isfinite(r.score)) {
      throw DataError("line " + std::to_string(line_no) +
                      ": score must be finite");
    }
    if (r.gold < 0 || r.pred < 0) {
      throw DataError("line " + std::to_string(line_no) +
                      ": class indices must be >= 0");
    }
    records.push_back(std::move(r));
  });
  if (records.empty()) {
    std::cerr << "warning: prediction file holds no records\n";
  }
  return records;
}

std::vector<PredictionRecord> ReadPredictions(
    const std::filesystem::path& path) {
  try {
    return ParsePredictions(ReadFile(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

double RoundSignificant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

namespace {

std::optional<double> Round(const std::optional<double>& v) {
  if (!v) return v;
  return RoundSignificant(*v);
}

void RoundGap(GroupGap& g) {
  g.value = Round(g.value);
  g.overall_fpr = Round(g.overall_fpr);
  for (auto& [k, v] : g.group_fpr) v = Round(v);
}

void RoundPerformance(PerformanceMetrics& p) {
  p.accuracy = RoundSignificant(p.accuracy);
  p.macro_f = RoundSignificant(p.macro_f);
  p.weighted_f = RoundSignificant(p.weighted_f);
  p.auc = Round(p.auc);
}

json PerformanceToJson(const PerformanceMetrics& p) {
  return {{"accuracy", p.accuracy},
          {"macro_f", p.macro_f},
          {"weighted_f", p.weighted_f},
          {"auc", OptionalToJson(p.auc)}};
}

PerformanceMetrics PerformanceFromJson(const json& j) {
  PerformanceMetrics p;
  p.accuracy = j.at("accuracy").get<double>();
  p.macro_f = j.at("macro_f").get<double>();
  p.weighted_f = j.at("weighted_f").get<double>();
  p.auc = OptionalFromJson(j.at("auc"));
  return p;
}

json GapToJson(const GroupGap& g) {
  json fpr = json::object();
  for (const auto& [k, v] : g.group_fpr) fpr[k] = OptionalToJson(v);
  return {{"value", OptionalToJson(g.value)},
          {"overall_fpr", OptionalToJson(g.overall_fpr)},
          {"group_fpr", fpr},
          {"group_counts", g.group_counts},
          {"skipped_groups", g.skipped_groups}};
}

GroupGap GapFromJson(const json& j) {
  GroupGap g;
  g.value = OptionalFromJson(j.at("value"));
  g.overall_fpr = OptionalFromJson(j.at("overall_fpr"));
  for (const auto& [k, v] : j.at("group_fpr").items()) {
    g.group_fpr[k] = OptionalFromJson(v);
  }
  g.group_counts =
      j.at("group_counts").get<std::map<std::string, std::int64_t>>();
  g.skipped_groups = j.at("skipped_groups").get<std::vector<std::string>>();
  return g;
}

}  // namespace

ReportFile MakeReportFile(const MetricReport& report, const json& config) {
  ReportFile file;
  file.report = report;
  file.toolkit_version = FAIRMT_VERSION;
  file.config = config;
  MetricReport& r = file.report;
  for (auto& [lang, block] : r.per_language) {
    RoundPerformance(block.performance);
    RoundGap(block.med);
  }
  RoundPerformance(r.overall);
  RoundGap(r.mued);
  r.med_avg = Round(r.med_avg);
  r.mepd = RoundSignificant(r.mepd);
  r.accuracy_avg = RoundSignificant(r.accuracy_avg);
  r.macro_f_avg = RoundSignificant(r.macro_f_avg);
  r.weighted_f_avg = RoundSignificant(r.weighted_f_avg);
  r.auc_avg = Round(r.auc_avg);
  return file;
}

std::string EmitReport(const ReportFile& file) {
  const MetricReport& r = file.report;
  json per_language = json::object();
  for (const auto& [lang, block] : r.per_language) {
    per_language[lang] = {{"records", block.records},
                          {"performance", PerformanceToJson(block.performance)},
                          {"med", GapToJson(block.med)}};
  }
  json j = {
      {"toolkit", {{"name", "fairmt"}, {"version", file.toolkit_version}}},
      {"formula_modes",
       {{"mepd", file.mepd_mode}, {"med_aggregate", file.med_aggregate_mode}}},
      {"attribute", r.attribute},
      {"positive", r.positive},
      {"per_language", per_language},
      {"overall", PerformanceToJson(r.overall)},
      {"aggregates",
       {{"med_avg", OptionalToJson(r.med_avg)},
        {"mued", OptionalToJson(r.mued.value)},
        {"mepd", r.mepd},
        {"accuracy_avg", r.accuracy_avg},
        {"macro_f_avg", r.macro_f_avg},
        {"weighted_f_avg", r.weighted_f_avg},
        {"auc_avg", OptionalToJson(r.auc_avg)}}},
      {"mued", GapToJson(r.mued)},
      {"notices", r.notices},
      {"config", file.config},
  };
  return j.dump(2) + "\n";
}

ReportFile ParseReport(const std::string& text) {
  try {
    const json j = json::parse(text);
    ReportFile file;
    file.toolkit_version = j.at("toolkit").at("version").get<std::string>();
    file.mepd_mode = j.at("formula_modes").at("mepd").get<std::string>();
    file.med_aggregate_mode =
        j.at("formula_modes").at("med_aggregate").get<std::string>();
    file.config = j.at("config");
    MetricReport& r = file.report;
    r.attribute = j.at("attribute").get<std::string>();
    r.positive = j.at("positive").get<int>();
    for (const auto& [lang, block] : j.at("per_language").items()) {
      LanguageMetrics m;
      m.records = block.at("records").get<std::int64_t>();
      m.performance = PerformanceFromJson(block.at("performance"));
      m.med = GapFromJson(block.at("med"));
      r.per_language.emplace(lang, m);
    }
    r.overall = PerformanceFromJson(j.at("overall"));
    const json& agg = j.at("aggregates");
    r.med_avg = OptionalFromJson(agg.at("med_avg"));
    r.mepd = agg.at("mepd").get<double>();
    r.accuracy_avg = agg.at("accuracy_avg").get<double>();
    r.macro_f_avg = agg.at("macro_f_avg").get<double>();
    r.weighted_f_avg = agg.at("weighted_f_avg").get<double>();
    r.auc_avg = OptionalFromJson(agg.at("auc_avg"));
    r.mued = GapFromJson(j.at("mued"));
    r.notices = j.at("notices").get<std::vector<std::string>>();
    return file;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad report: ") + e.what());
  }
}

namespace {

void EmitMatrix(std::ostringstream& out, const char* name, const double* data,
                Eigen::Index rows, Eigen::Index cols) {
  out << name << ' ' << rows << ' ' << cols << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", data[r * cols + c]);
      if (c > 0) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

void ParseMatrix(std::istream& in, const char* name, double* data,
                 Eigen::Index rows, Eigen::Index cols) {
  std::string got;
  Eigen::Index r = 0, c = 0;
  if (!(in >> got >> r >> c) || got != name || r != rows || c != cols) {
    throw DataError(std::string("checkpoint: bad block header for ") + name);
  }
  for (Eigen::Index i = 0; i < rows * cols; ++i) {
    if (!(in >> data[i])) {
      throw DataError(std::string("checkpoint: truncated block ") + name);
    }
  }
}

}  // namespace

std::string EmitCheckpoint(const EncoderParams& params) {
  std::ostringstream out;
  const auto& d = params.dims;
  const auto& b = params.blocks;
  out << "fairmt-checkpoint 1\n";
  out << "dims " << d.embed_dim << ' ' << d.hidden_dim << ' ' << d.num_classes
      << ' ' << (d.identity ? 1 : 0) << '\n';
  out << "vocab " << params.vocab.size() << '\n';
  for (const auto& t : params.vocab.tokens()) out << json(t).dump() << '\n';
  EmitMatrix(out, "embedding", b.embedding.data(), b.embedding.rows(),
             b.embedding.cols());
  EmitMatrix(out, "projection", b.projection.data(), b.projection.rows(),
             b.projection.cols());
  EmitMatrix(out, "projection_bias", b.projection_bias.data(), 1,
             b.projection_bias.size());
  EmitMatrix(out, "classifier_weight", b.classifier_weight.data(),
             b.classifier_weight.rows(), b.classifier_weight.cols());
  EmitMatrix(out, "classifier_bias", b.classifier_bias.data(), 1,
             b.classifier_bias.size());
  return out.str();
}

EncoderParams ParseCheckpoint(const std::string& text) {
  std::istringstream in(text);
  std::string magic, word;
  int version = 0;
  if (!(in >> magic >> version) || magic != "fairmt-checkpoint" ||
      version != 1) {
    throw DataError("checkpoint: bad header");
  }
  EncoderDims dims;
  int identity = 0;
  if (!(in >> word >> dims.embed_dim >> dims.hidden_dim >> dims.num_classes >>
        identity) ||
      word != "dims") {
    throw DataError("checkpoint: bad dims line");
  }
  dims.identity = identity != 0;
  int v = 0;
  if (!(in >> word >> v) || word != "vocab" || v < 1) {
    throw DataError("checkpoint: bad vocab line");
  }
  std::string line;
  std::getline(in, line);
  std::vector<std::string> tokens;
  for (int i = 0; i < v; ++i) {
    if (!std::getline(in, line)) throw DataError("checkpoint: truncated vocab");
    try {
      tokens.push_back(json::parse(line).get<std::string>());
    } catch (const json::exception&) {
      throw DataError("checkpoint: bad vocab entry");
    }
  }
  if (tokens.empty() || tokens.front() != kUnkToken) {
    throw DataError("checkpoint: vocab must start with the unknown token");
  }
  EncoderParams p;
  p.vocab = Vocab::FromTokens({tokens.begin() + 1, tokens.end()});
  if (p.vocab.tokens() != tokens) {
    throw DataError("checkpoint: vocab entries must be sorted and distinct");
  }
  p.dims = dims;
  auto& b = p.blocks;
  b.embedding.resize(v, dims.embed_dim);
  b.projection.resize(dims.hidden_dim, dims.embed_dim);
  b.projection_bias.resize(dims.hidden_dim);
  b.classifier_weight.resize(dims.num_classes, dims.hidden_dim);
  b.classifier_bias.resize(dims.num_classes);
  ParseMatrix(in, "embedding", b.embedding.data(), v, dims.embed_dim);
  ParseMatrix(in, "projection", b.projection.data(), dims.hidden_dim,
              dims.embed_dim);
  ParseMatrix(in, "projection_bias", b.projection_bias.data(), 1,
              dims.hidden_dim);
  ParseMatrix(in, "classifier_weight", b.classifier_weight.data(),
              dims.num_classes, dims.hidden_dim);
  ParseMatrix(in, "classifier_bias", b.classifier_bias.data(), 1,
              dims.num_classes);
  return p;
}

json CorpusSpecToJson(const CorpusSpec& spec) {
  json langs = json::array();
  for (const auto& l : spec.languages) {
    langs.push_back({{"code", l.code},
                     {"samples", l.samples},
                     {"positive_rate", l.positive_rate}});
  }
  json attrs = json::array();
  for (const auto& a : spec.attributes) {
    attrs.push_back({{"name", a.spec.name},
                     {"values", a.spec.values},
                     {"probs", a.probs},
                     {"disadvantaged", a.disadvantaged}});
  }
  return {{"languages", langs},
          {"num_classes", spec.num_classes},
          {"positive_class", spec.positive_class},
          {"attributes", attrs},
          {"vocab_per_language", spec.vocab_per_language},
          {"signal_tokens_per_class", spec.signal_tokens_per_class},
          {"min_tokens", spec.min_tokens},
          {"max_tokens", spec.max_tokens},
          {"label_signal_strength", spec.label_signal_strength},
          {"bias_strength", spec.bias_strength},
          {"train_fraction", spec.train_fraction},
          {"dev_fraction", spec.dev_fraction}};
}

CorpusSpec CorpusSpecFromJson(const json& j) {
  // Missing keys keep the defaults of DefaultCorpusSpec().
  CorpusSpec spec = DefaultCorpusSpec();
  try {
    if (j.contains("languages")) {
      spec.languages.clear();
      for (const auto& l : j.at("languages")) {
        spec.languages.push_back({l.at("code").get<std::string>(),
                                  l.at("samples").get<int>(),
                                  l.value("positive_rate", 0.3)});
      }
    }
    if (j.contains("attributes")) {
      spec.attributes.clear();
      for (const auto& a : j.at("attributes")) {
        AttributeMarginal m;
        m.spec.name = a.at("name").get<std::string>();
        m.spec.values = a.at("values").get<std::vector<std::string>>();
        m.probs = a.contains("probs")
                      ? a.at("probs").get<std::vector<double>>()
                      : std::vector<double>(m.spec.values.size(),
                                            1.0 / m.spec.values.size());
        m.disadvantaged = a.value("disadvantaged", 1);
        spec.attributes.push_back(std::move(m));
      }
    }
    spec.num_classes = j.value("num_classes", spec.num_classes);
    spec.positive_class = j.value("positive_class", spec.positive_class);
    spec.vocab_per_language =
        j.value("vocab_per_language", spec.vocab_per_language);
    spec.signal_tokens_per_class =
        j.value("signal_tokens_per_class", spec.signal_tokens_per_class);
    spec.min_tokens = j.value("min_tokens", spec.min_tokens);
    spec.max_tokens = j.value("max_tokens", spec.max_tokens);
    spec.label_signal_strength =
        j.value("label_signal_strength", spec.label_signal_strength);
    spec.bias_strength = j.value("bias_strength", spec.bias_strength);
    spec.train_fraction = j.value("train_fraction", spec.train_fraction);
    spec.dev_fraction = j.value("dev_fraction", spec.dev_fraction);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad corpus spec: ") + e.what());
  }
  return spec;
}

json TrainConfigToJson(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"alpha", c.weights.alpha},
          {"beta", c.weights.beta},
          {"tau", c.weights.TauLf()},
          {"tau_td", c.weights.TauTd()},
          {"mode", ToString(c.mode)},
          {"attribute", c.attribute},
          {"seed", c.seed},
          {"sampler", ToString(c.sampler)},
          {"embed_dim", c.dims.embed_dim},
          {"hidden_dim", c.dims.hidden_dim},
          {"identity_encoder", c.dims.identity},
          {"positive", c.positive}};
}

json EpochStatsToJson(const EpochStats& s) {
  return {{"l_lf", s.l_lf}, {"l_td", s.l_td}, {"l_ce", s.l_ce},
          {"total", s.total}};
}

}  // namespace fairmt
