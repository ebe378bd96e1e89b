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

// Delimited-text tables: the Elo table (method,elo,p99Low,p99Hi,bpp), the
// equivalent-quality table and the plot-data export.

#ifndef PAIREVAL_TABLE_IO_H_
#define PAIREVAL_TABLE_IO_H_

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "paireval/analysis.h"
#include "paireval/domain.h"

namespace paireval {

struct CsvRow {
  int line = 0;  // 1-based line number of the row's first line.
  std::vector<std::string> fields;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
  // Column index by header name; -1 when absent.
  int Column(const std::string& name) const;
};

// RFC 4180 style: quoted fields may contain the delimiter, doubled quotes
// and newlines. A trailing '\r' is dropped. Blank lines are skipped.
CsvTable ReadCsv(std::istream& in, char delimiter = ',');

// Quotes a field when it contains the delimiter, a quote or a newline.
std::string CsvField(const std::string& value, char delimiter = ',');

// Rounded to two decimals with trailing zeros dropped: 1947, 1611.1, 0.9.
std::string FormatTrimmed(double value);
// Rounded to two decimals, always two digits: 1.80.
std::string FormatFixed2(double value);

struct EloTableRow {
  EloEstimate estimate;
  std::optional<double> bpp;
};

std::vector<EloTableRow> ReadEloTable(std::istream& in);
std::vector<EloTableRow> ReadEloTableFile(const std::string& path);
void WriteEloTable(std::ostream& out, const std::vector<EloTableRow>& rows);

// Rows of an Elo table that carry a bpp value.
std::vector<RatePoint> RatePoints(const std::vector<EloTableRow>& rows);

inline constexpr const char* kGapMarker = "NA";

// Header "<anchor>_equiv_quality,elo,<anchor>_bitrate,<other>_bitrate...".
// Out-of-range cells print kGapMarker, or the row is dropped when
// `omit_gaps` is set.
void WriteEquivalentQualityTable(std::ostream& out,
                                 const EquivalentQualityTable& table,
                                 bool omit_gaps = false);

// Parsed back into (column name -> value) rows; gap cells are absent.
std::vector<std::map<std::string, std::string>> ReadEquivalentQualityTable(
    std::istream& in);

// family,method,bpp,elo rows, one series per ladder.
void WritePlotData(std::ostream& out, const std::vector<Ladder>& ladders);

}  // namespace paireval

#endif  // PAIREVAL_TABLE_IO_H_
