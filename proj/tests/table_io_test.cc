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

#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

namespace paireval {
namespace {

TEST(ReadCsvTest, QuotedFieldsAndLineNumbers) {
  std::istringstream in(
      "a,b,c\r\n"
      "1,\"x,y\",\"he said \"\"hi\"\"\"\n"
      "\n"
      "2,\"multi\nline\",z\n"
      "3,,\n");
  CsvTable t = ReadCsv(in);
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].fields[1], "x,y");
  EXPECT_EQ(t.rows[0].fields[2], "he said \"hi\"");
  EXPECT_EQ(t.rows[0].line, 2);
  EXPECT_EQ(t.rows[1].fields[1], "multi\nline");
  EXPECT_EQ(t.rows[1].line, 4);
  EXPECT_EQ(t.rows[2].line, 6);
  EXPECT_EQ(t.rows[2].fields, (std::vector<std::string>{"3", "", ""}));
  EXPECT_EQ(t.Column("c"), 2);
  EXPECT_EQ(t.Column("d"), -1);
}

TEST(ReadCsvTest, TabDelimited) {
  std::istringstream in("a\tb\n1\t2\n");
  CsvTable t = ReadCsv(in, '\t');
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].fields[1], "2");
}

TEST(CsvFieldTest, QuotesWhenNeeded) {
  EXPECT_EQ(CsvField("plain"), "plain");
  EXPECT_EQ(CsvField("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvField("q\"x"), "\"q\"\"x\"");
  // Round trip through the reader.
  for (std::string v : {"a,b", "q\"x", "line\nbreak", ""}) {
    std::istringstream in("h\n" + CsvField(v) + "\n");
    CsvTable t = ReadCsv(in);
    if (v.empty()) {
      EXPECT_TRUE(t.rows.empty());
    } else {
      ASSERT_EQ(t.rows.size(), 1u);
      EXPECT_EQ(t.rows[0].fields[0], v);
    }
  }
}

TEST(FormatTest, TrimmedAndFixed) {
  EXPECT_EQ(FormatTrimmed(1947.0), "1947");
  EXPECT_EQ(FormatTrimmed(1611.1), "1611.1");
  EXPECT_EQ(FormatTrimmed(0.9), "0.9");
  EXPECT_EQ(FormatTrimmed(1616.224), "1616.22");
  EXPECT_EQ(FormatFixed2(1.8), "1.80");
  EXPECT_EQ(FormatFixed2(0.985), "0.99");
}

TEST(EloTableTest, FixtureRoundTripsByteForByte) {
  std::string path = std::string(PAIREVAL_FIXTURES) + "/appendix_a.csv";
  std::ifstream in(path);
  std::stringstream original;
  original << in.rdbuf();
  auto rows = ReadEloTableFile(path);
  ASSERT_EQ(rows.size(), 31u);
  EXPECT_EQ(rows[0].estimate.method, "jpegli-q55-yuv444");
  EXPECT_DOUBLE_EQ(rows[0].estimate.p99_low, 1570.12);
  EXPECT_DOUBLE_EQ(*rows[0].bpp, 0.9);
  std::ostringstream out;
  WriteEloTable(out, rows);
  EXPECT_EQ(out.str(), original.str());
  EXPECT_EQ(RatePoints(rows).size(), 31u);
}

TEST(EloTableTest, OptionalColumns) {
  std::istringstream in("method,elo\na-q1-yuv444,2000\n");
  auto rows = ReadEloTable(in);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].bpp.has_value());
  EXPECT_TRUE(RatePoints(rows).empty());
  std::istringstream bad("name,score\nx,1\n");
  try {
    ReadEloTable(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "parse");
  }
  std::istringstream nonnum("method,elo\nx,abc\n");
  EXPECT_THROW(ReadEloTable(nonnum), Error);
  EXPECT_THROW(ReadEloTableFile("/nonexistent.csv"), Error);
}

TEST(EquivalentQualityTableTest, WritesGapsAndParsesBack) {
  EquivalentQualityTable t;
  t.anchor_family = "libjpeg_turbo";
  t.other_families = {"mozjpeg", "jpegli"};
  t.rows = {{"libjpeg-turbo-q55-yuv420", 1417.72, 0.89, {std::nullopt, std::nullopt}},
            {"libjpeg-turbo-q70-yuv420", 1685.13, 1.13, {0.9364, 0.985}}};
  std::ostringstream out;
  WriteEquivalentQualityTable(out, t);
  EXPECT_EQ(out.str(),
            "libjpeg_turbo_equiv_quality,elo,libjpeg_turbo_bitrate,"
            "mozjpeg_bitrate,jpegli_bitrate\n"
            "libjpeg-turbo-q55-yuv420,1417.72,0.89,NA,NA\n"
            "libjpeg-turbo-q70-yuv420,1685.13,1.13,0.94,0.99\n");
  std::istringstream in(out.str());
  auto rows = ReadEquivalentQualityTable(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].count("mozjpeg_bitrate"));
  EXPECT_EQ(rows[1].at("jpegli_bitrate"), "0.99");

  std::ostringstream omitted;
  WriteEquivalentQualityTable(omitted, t, true);
  EXPECT_EQ(omitted.str().find("q55"), std::string::npos);
}

TEST(PlotDataTest, OneSeriesPerLadder) {
  Ladder a{"x", {{"x-q1-yuv444", 1, 0.5}, {"x-q2-yuv444", 2, 0.75}}};
  Ladder b{"y", {{"y-q1-yuv444", 3, 1.0}, {"y-q2-yuv444", 4, 2.0}}};
  std::ostringstream out;
  WritePlotData(out, {a, b});
  std::istringstream in(out.str());
  CsvTable t = ReadCsv(in);
  EXPECT_EQ(t.header, (std::vector<std::string>{"family", "method", "bpp", "elo"}));
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[2].fields[0], "y");
}

}  // namespace
}  // namespace paireval
