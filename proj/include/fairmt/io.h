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

#ifndef FAIRMT_IO_H_
#define FAIRMT_IO_H_

// File formats.
//
// Samples (JSON lines), one object per line:
//   {"attrs":{"gender":"female"},"id":"en-00001","label":1,"lang":"en",
//    "split":"train","tokens":["en_w3","en_c1_0"]}
// Predictions (JSON lines):
//   {"attrs":{...},"gold":0,"id":"en-00001","lang":"en","pred":1,"score":0.73}
// Schema (JSON document, optional next to sample files): num_classes,
//   languages, attribute_specs [{name, values}], max_len.
// Report (JSON document): metric values rounded to 6 significant digits,
//   formula-mode flags, notices, toolkit version and a config snapshot.
// Checkpoint (text): see WriteCheckpoint.
//
// All writers emit sorted keys and are deterministic; files are written to a
// temporary path and renamed into place.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairmt/encoder.h"
#include "fairmt/metrics.h"
#include "fairmt/synth.h"
#include "fairmt/trainer.h"
#include "fairmt/types.h"
#include "json.hpp"

namespace fairmt {

// Malformed or invalid input data (as opposed to a usage error).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes `content` to `path.tmp` and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& content);
std::string ReadFile(const std::filesystem::path& path);

struct DatasetSchema {
  int num_classes = 2;
  std::vector<std::string> languages;
  std::vector<AttributeSpec> attribute_specs;
  std::size_t max_len = kDefaultMaxLen;
};

DatasetSchema SchemaOf(const Dataset& dataset);
nlohmann::json SchemaToJson(const DatasetSchema& schema);
DatasetSchema SchemaFromJson(const nlohmann::json& j);

std::string EmitSamples(const std::vector<Sample>& samples);

// Parses sample lines and validates the result. Without a schema, the class
// count, languages and attribute values are inferred from the data (sorted).
// Throws DataError naming the 1-based line on malformed input, or listing
// every violation when validation fails.
Dataset ParseSamples(const std::string& text,
                     const std::optional<DatasetSchema>& schema = std::nullopt);
Dataset ReadSamples(const std::filesystem::path& path,
                    const std::optional<DatasetSchema>& schema = std::nullopt);

std::string EmitPredictions(const std::vector<PredictionRecord>& records);
// An empty input yields no records and a warning on stderr.
std::vector<PredictionRecord> ParsePredictions(const std::string& text);
std::vector<PredictionRecord> ReadPredictions(
    const std::filesystem::path& path);

inline constexpr const char* kMepdMode = "mean-absolute-deviation";
inline constexpr const char* kMedAggregateMode = "mean";

struct ReportFile {
  MetricReport report;
  std::string toolkit_version;
  std::string mepd_mode = kMepdMode;
  std::string med_aggregate_mode = kMedAggregateMode;
  nlohmann::json config = nlohmann::json::object();

  bool operator==(const ReportFile&) const = default;
};

// Rounds every real in the report to 6 significant digits so that the
// emitted file and the in-memory value agree exactly.
ReportFile MakeReportFile(const MetricReport& report,
                          const nlohmann::json& config);
std::string EmitReport(const ReportFile& report);
ReportFile ParseReport(const std::string& text);

double RoundSignificant(double value, int digits = 6);

// Text checkpoint:
//   fairmt-checkpoint 1
//   dims <E> <H> <K> <identity 0|1>
//   vocab <V>
//   <V lines, each a JSON string>
//   <name> <rows> <cols>      for each block in flat order
//   <rows lines of %.17g values>
std::string EmitCheckpoint(const EncoderParams& params);
EncoderParams ParseCheckpoint(const std::string& text);

nlohmann::json CorpusSpecToJson(const CorpusSpec& spec);
CorpusSpec CorpusSpecFromJson(const nlohmann::json& j);

nlohmann::json TrainConfigToJson(const TrainConfig& config);
nlohmann::json EpochStatsToJson(const EpochStats& stats);

}  // namespace fairmt

#endif  // FAIRMT_IO_H_
