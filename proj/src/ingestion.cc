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

#include "paireval/ingestion.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "paireval/table_io.h"

namespace paireval {
namespace {

std::vector<int> Counts(const IngestStats& s) {
  std::vector<int> c;
  for (const auto& [rater, n] : s.per_rater) c.push_back(n);
  std::sort(c.begin(), c.end());
  return c;
}

Stimulus GoldenSide(const std::string& label, const std::string& original) {
  if (label == original) return Stimulus::Original();
  int quality = 0;
  size_t open = label.find('(');
  if (open != std::string::npos) {
    quality = std::atoi(label.c_str() + open + 1);
  }
  return Stimulus::HeavyDegraded(quality);
}

}  // namespace

ColumnMapping ColumnMapping::FromJson(const nlohmann::json& doc) {
  ColumnMapping m;
  auto get = [&](const char* key, std::string* out) {
    if (doc.contains(key)) *out = doc.at(key).get<std::string>();
  };
  get("rater", &m.rater);
  get("image", &m.image);
  get("method_a", &m.method_a);
  get("method_b", &m.method_b);
  get("choice", &m.choice);
  get("golden", &m.golden);
  get("original_token", &m.original_token);
  if (doc.contains("delimiter")) {
    std::string d = doc.at("delimiter").get<std::string>();
    m.delimiter = d == "\\t" || d == "tab" ? '\t' : d.at(0);
  }
  if (doc.contains("choice_tokens")) {
    m.choice_tokens.clear();
    for (const auto& [token, side] : doc.at("choice_tokens").items()) {
      auto c = ParseChoice(side.get<std::string>());
      if (!c) {
        throw Error("config", "choice token \"" + token +
                                  "\" must map to left or right");
      }
      m.choice_tokens[token] = *c;
    }
  }
  if (doc.contains("golden_true_tokens")) {
    m.golden_true_tokens =
        doc.at("golden_true_tokens").get<std::set<std::string>>();
  }
  return m;
}

int IngestStats::min_count() const {
  auto c = Counts(*this);
  return c.empty() ? 0 : c.front();
}

int IngestStats::max_count() const {
  auto c = Counts(*this);
  return c.empty() ? 0 : c.back();
}

double IngestStats::mean_count() const {
  auto c = Counts(*this);
  if (c.empty()) return 0.0;
  return std::accumulate(c.begin(), c.end(), 0.0) / c.size();
}

double IngestStats::median_count() const {
  auto c = Counts(*this);
  if (c.empty()) return 0.0;
  size_t n = c.size();
  return n % 2 ? c[n / 2] : 0.5 * (c[n / 2 - 1] + c[n / 2]);
}

double IngestStats::stddev_count() const {
  auto c = Counts(*this);
  if (c.size() < 2) return 0.0;
  double mean = mean_count();
  double sq = 0.0;
  for (int v : c) sq += (v - mean) * (v - mean);
  return std::sqrt(sq / (c.size() - 1));
}

std::vector<Judgment> ParsedRatings::Judgments() const {
  std::vector<Judgment> out;
  out.reserve(answers.size());
  for (size_t i = 0; i < answers.size(); ++i) {
    out.push_back(Resolve(questions[i], answers[i]));
  }
  return out;
}

ParsedRatings ParseAnswers(std::istream& in, const ColumnMapping& mapping,
                           const std::set<std::string>* known_methods) {
  CsvTable table = ReadCsv(in, mapping.delimiter);
  if (table.header.empty()) {
    throw Error("empty_file", "ratings file is empty (no header row)");
  }
  auto column = [&](const std::string& name) {
    int c = table.Column(name);
    if (c < 0) {
      throw Error("missing_column",
                  "ratings file has no column \"" + name + "\"");
    }
    return c;
  };
  const int rater_col = column(mapping.rater);
  const int image_col = column(mapping.image);
  const int a_col = column(mapping.method_a);
  const int b_col = column(mapping.method_b);
  const int choice_col = column(mapping.choice);
  const int golden_col = mapping.golden.empty() ? -1 : column(mapping.golden);

  ParsedRatings out;
  for (const CsvRow& row : table.rows) {
    ++out.stats.data_rows;
    auto bad = [&](std::string reason) {
      out.malformed.push_back({row.line, std::move(reason)});
    };
    if (row.fields.size() != table.header.size()) {
      bad("expected " + std::to_string(table.header.size()) + " fields, got " +
          std::to_string(row.fields.size()));
      continue;
    }
    const std::string& rater = row.fields[rater_col];
    const std::string& a = row.fields[a_col];
    const std::string& b = row.fields[b_col];
    const std::string& choice_cell = row.fields[choice_col];
    bool golden = golden_col >= 0 &&
                  mapping.golden_true_tokens.count(row.fields[golden_col]) > 0;
    if (rater.empty()) {
      bad("empty rater id");
      continue;
    }
    std::optional<Choice> choice;
    if (choice_cell == a && choice_cell != b) {
      choice = Choice::kLeft;
    } else if (choice_cell == b && choice_cell != a) {
      choice = Choice::kRight;
    } else if (auto it = mapping.choice_tokens.find(choice_cell);
               it != mapping.choice_tokens.end()) {
      choice = it->second;
    }
    if (!choice) {
      bad("unknown choice token \"" + choice_cell + "\"");
      continue;
    }

    Question q;
    q.id = "row-" + std::to_string(row.line);
    q.image = row.fields[image_col];
    q.rater = rater;
    q.issued_at = row.line;
    q.golden = golden;
    if (golden) {
      if ((a == mapping.original_token) == (b == mapping.original_token)) {
        bad("golden row needs exactly one " + mapping.original_token +
            " side");
        continue;
      }
      q.left = GoldenSide(a, mapping.original_token);
      q.right = GoldenSide(b, mapping.original_token);
    } else {
      if (a.empty() || b.empty() || a == b) {
        bad("needs two distinct methods");
        continue;
      }
      if (known_methods != nullptr) {
        const std::string* unknown = !known_methods->count(a)   ? &a
                                     : !known_methods->count(b) ? &b
                                                                : nullptr;
        if (unknown != nullptr) {
          bad("method \"" + *unknown + "\" not declared in the study");
          continue;
        }
      }
      q.left = Stimulus::OfMethod(a);
      q.right = Stimulus::OfMethod(b);
      out.stats.methods.insert(a);
      out.stats.methods.insert(b);
    }

    Answer ans;
    ans.question = q.id;
    ans.rater = rater;
    ans.choice = *choice;
    ans.answered_at = row.line;
    ++out.stats.answers;
    ++out.stats.per_rater[rater];
    if (golden) {
      ++out.stats.golden_answers;
      if (!Resolve(q, ans).correct) ++out.stats.golden_wrong;
    }
    out.questions.push_back(std::move(q));
    out.answers.push_back(std::move(ans));
  }
  return out;
}

ParsedRatings ParseAnswersFile(const std::string& path,
                               const ColumnMapping& mapping,
                               const std::set<std::string>* known_methods) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open ratings file " + path);
  return ParseAnswers(in, mapping, known_methods);
}

void WriteRatings(std::ostream& out, const std::vector<Question>& questions,
                  const std::vector<Answer>& answers) {
  out << "rater,image,method_a,method_b,choice,golden\n";
  for (size_t i = 0; i < answers.size(); ++i) {
    const Question& q = questions[i];
    const Answer& a = answers[i];
    const Stimulus& chosen = a.choice == Choice::kLeft ? q.left : q.right;
    out << CsvField(a.rater) << ',' << CsvField(q.image) << ','
        << CsvField(q.left.Label()) << ',' << CsvField(q.right.Label()) << ','
        << CsvField(chosen.Label()) << ',' << (q.golden ? 1 : 0) << '\n';
  }
}

}  // namespace paireval
