// Copyright 2026 The Paireval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reading published ratings files into questions and answers.

#ifndef PAIREVAL_INGESTION_H_
#define PAIREVAL_INGESTION_H_

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "paireval/domain.h"

namespace paireval {

// Maps canonical fields onto the columns of a ratings file.
struct ColumnMapping {
  std::string rater = "rater";
  std::string image = "image";
  std::string method_a = "method_a";
  std::string method_b = "method_b";
  std::string choice = "choice";
  // Empty when the file has no golden column.
  std::string golden = "golden";
  char delimiter = ',';

  // A choice cell equal to the method_a (method_b) cell selects the left
  // (right) side; otherwise it is looked up here.
  std::map<std::string, Choice> choice_tokens = {
      {"a", Choice::kLeft},     {"A", Choice::kLeft},
      {"left", Choice::kLeft},  {"b", Choice::kRight},
      {"B", Choice::kRight},    {"right", Choice::kRight}};
  std::set<std::string> golden_true_tokens = {"1", "true", "True", "TRUE",
                                              "yes"};
  // Stimulus label of the undegraded image in golden rows.
  std::string original_token = "ORIGINAL";

  static ColumnMapping FromJson(const nlohmann::json& doc);
};

struct MalformedRow {
  int line = 0;
  std::string reason;
};

struct IngestStats {
  int data_rows = 0;
  int answers = 0;
  int golden_answers = 0;
  int golden_wrong = 0;
  std::map<std::string, int> per_rater;
  std::set<std::string> methods;

  int raters() const { return static_cast<int>(per_rater.size()); }
  // Summary of the per-rater answer counts; zero when there are no raters.
  int min_count() const;
  int max_count() const;
  double mean_count() const;
  double median_count() const;
  double stddev_count() const;  // Sample standard deviation.
};

struct ParsedRatings {
  std::vector<Question> questions;  // questions[i] is answered by answers[i].
  std::vector<Answer> answers;
  IngestStats stats;
  std::vector<MalformedRow> malformed;

  std::vector<Judgment> Judgments() const;
};

// Parses a delimited ratings file with a header row. Every data row becomes
// either an answer or a malformed-row entry. When `known_methods` is given,
// rows naming any other method are malformed. Throws Error{"empty_file"}
// without a header and Error{"missing_column"} when a mapped column is absent.
ParsedRatings ParseAnswers(std::istream& in, const ColumnMapping& mapping,
                           const std::set<std::string>* known_methods = nullptr);

ParsedRatings ParseAnswersFile(const std::string& path,
                               const ColumnMapping& mapping,
                               const std::set<std::string>* known_methods = nullptr);

// Writes questions/answers in the default ColumnMapping layout (choice cells
// carry the chosen stimulus label).
void WriteRatings(std::ostream& out, const std::vector<Question>& questions,
                  const std::vector<Answer>& answers);

}  // namespace paireval

#endif  // PAIREVAL_INGESTION_H_
