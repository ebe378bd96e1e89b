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

#include "paireval/table_io.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace paireval {
namespace {

double ParseNumber(const std::string& s, int line, const char* column) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error("parse", "line " + std::to_string(line) + ": column " +
                             column + " is not a number: \"" + s + "\"");
  }
  return v;
}

}  // namespace

int CsvTable::Column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable ReadCsv(std::istream& in, char delimiter) {
  CsvTable table;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool any = false;  // Current record has content.
  int line = 1;
  int record_line = 1;
  auto end_record = [&]() {
    fields.push_back(std::move(field));
    field.clear();
    bool blank = fields.size() == 1 && fields[0].empty() && !any;
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(fields);
      } else {
        table.rows.push_back({record_line, std::move(fields)});
      }
    }
    fields.clear();
    any = false;
  };
  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_record();
      ++line;
      record_line = line;
    } else {
      field += c;
      any = true;
    }
  }
  if (!field.empty() && field.back() == '\r') field.pop_back();
  if (any || !field.empty() || !fields.empty()) end_record();
  return table;
}

std::string CsvField(const std::string& value, char delimiter) {
  if (value.find_first_of(std::string("\"\n\r") + delimiter) ==
      std::string::npos) {
    return value;
  }
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string FormatTrimmed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", RoundDecimal(value, 2));
  std::string s(buf);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string FormatFixed2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", RoundDecimal(value, 2));
  return buf;
}

std::vector<EloTableRow> ReadEloTable(std::istream& in) {
  CsvTable table = ReadCsv(in);
  const int method = table.Column("method");
  const int elo = table.Column("elo");
  const int low = table.Column("p99Low");
  const int high = table.Column("p99Hi");
  const int bpp = table.Column("bpp");
  if (method < 0 || elo < 0) {
    throw Error("parse", "Elo table needs at least method and elo columns");
  }
  std::vector<EloTableRow> rows;
  for (const auto& row : table.rows) {
    auto cell = [&](int col) -> std::string {
      return col >= 0 && col < static_cast<int>(row.fields.size())
                 ? row.fields[col]
                 : std::string();
    };
    EloTableRow r;
    r.estimate.method = cell(method);
    r.estimate.elo = ParseNumber(cell(elo), row.line, "elo");
    r.estimate.p99_low = low >= 0 && !cell(low).empty()
                             ? ParseNumber(cell(low), row.line, "p99Low")
                             : r.estimate.elo;
    r.estimate.p99_high = high >= 0 && !cell(high).empty()
                              ? ParseNumber(cell(high), row.line, "p99Hi")
                              : r.estimate.elo;
    if (bpp >= 0 && !cell(bpp).empty()) {
      r.bpp = ParseNumber(cell(bpp), row.line, "bpp");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<EloTableRow> ReadEloTableFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  return ReadEloTable(in);
}

void WriteEloTable(std::ostream& out, const std::vector<EloTableRow>& rows) {
  out << "method,elo,p99Low,p99Hi,bpp\n";
  for (const auto& r : rows) {
    out << CsvField(r.estimate.method) << ',' << FormatTrimmed(r.estimate.elo)
        << ',' << FormatTrimmed(r.estimate.p99_low) << ','
        << FormatTrimmed(r.estimate.p99_high) << ','
        << (r.bpp ? FormatTrimmed(*r.bpp) : std::string()) << '\n';
  }
}

std::vector<RatePoint> RatePoints(const std::vector<EloTableRow>& rows) {
  std::vector<RatePoint> points;
  for (const auto& r : rows) {
    if (r.bpp) points.push_back({r.estimate.method, r.estimate.elo, *r.bpp});
  }
  return points;
}

void WriteEquivalentQualityTable(std::ostream& out,
                                 const EquivalentQualityTable& table,
                                 bool omit_gaps) {
  out << table.anchor_family << "_equiv_quality,elo," << table.anchor_family
      << "_bitrate";
  for (const auto& f : table.other_families) out << ',' << f << "_bitrate";
  out << '\n';
  for (const auto& row : table.rows) {
    bool gap = false;
    for (const auto& b : row.bitrates) gap |= !b.has_value();
    if (gap && omit_gaps) continue;
    out << CsvField(row.anchor_method) << ',' << FormatTrimmed(row.elo) << ','
        << FormatFixed2(row.anchor_bpp);
    for (const auto& b : row.bitrates) {
      out << ',' << (b ? FormatFixed2(*b) : std::string(kGapMarker));
    }
    out << '\n';
  }
}

std::vector<std::map<std::string, std::string>> ReadEquivalentQualityTable(
    std::istream& in) {
  CsvTable table = ReadCsv(in);
  std::vector<std::map<std::string, std::string>> rows;
  for (const auto& row : table.rows) {
    std::map<std::string, std::string> r;
    for (size_t i = 0; i < row.fields.size() && i < table.header.size(); ++i) {
      if (row.fields[i] != kGapMarker) r[table.header[i]] = row.fields[i];
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void WritePlotData(std::ostream& out, const std::vector<Ladder>& ladders) {
  out << "family,method,bpp,elo\n";
  for (const auto& l : ladders) {
    for (const auto& p : l.points) {
      out << CsvField(l.family) << ',' << CsvField(p.method) << ','
          << FormatTrimmed(p.bpp) << ',' << FormatTrimmed(p.elo) << '\n';
    }
  }
}

}  // namespace paireval
