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

#include "cli.h"

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "paireval/analysis.h"
#include "paireval/corpus.h"
#include "paireval/elo_fit.h"
#include "paireval/ingestion.h"
#include "paireval/serialization.h"
#include "paireval/service.h"
#include "paireval/simulate.h"
#include "paireval/study_config.h"
#include "paireval/table_io.h"

namespace paireval {
namespace {

using nlohmann::json;

json LoadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("parse", path + ": " + e.what());
  }
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
void WriteOutput(const std::string& path, std::ostream& fallback,
                 const std::string& text) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot write " + path);
  f << text;
  if (!f) throw Error("io", "write to " + path + " failed");
}

SimulationSpec DefaultSimulationSpec() {
  SimulationSpec spec;
  for (int elo = 1600; elo <= 2300; elo += 100) {
    spec.true_elos.push_back({"method-" + std::to_string(elo), elo});
  }
  spec.rater_noise = {{"rater-1", 0.0},
                      {"rater-2", 0.025},
                      {"rater-3", 0.05},
                      {"rater-4", 0.075},
                      {"rater-5", 0.1}};
  spec.answers = 5000;
  spec.golden.threshold = 20;
  return spec;
}

struct FitArgs {
  std::string ratings;
  std::string config;
  std::string mapping;
  std::string out;
  std::string fit_json;
  std::string reference;
};

int CmdFit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  StudyConfig config = LoadStudyConfig(a.config);
  ColumnMapping mapping =
      a.mapping.empty() ? ColumnMapping() : ColumnMapping::FromJson(LoadJson(a.mapping));
  std::vector<std::string> ids = config.MethodIds();
  std::set<std::string> known(ids.begin(), ids.end());
  ParsedRatings parsed = ParseAnswersFile(a.ratings, mapping, &known);
  const IngestStats& s = parsed.stats;
  if (!parsed.malformed.empty()) {
    err << "warning: " << parsed.malformed.size() << " malformed rows skipped\n";
    for (size_t i = 0; i < parsed.malformed.size() && i < 10; ++i) {
      err << "  line " << parsed.malformed[i].line << ": "
          << parsed.malformed[i].reason << "\n";
    }
  }
  if (s.answers == 0) throw Error("no_answers", "no answers in " + a.ratings);
  err << "answers " << s.answers << " (golden " << s.golden_answers << ", wrong "
      << s.golden_wrong << "), raters " << s.raters() << ", per-rater min "
      << s.min_count() << " max " << s.max_count() << " mean "
      << FormatTrimmed(s.mean_count()) << " median "
      << FormatTrimmed(s.median_count()) << "\n";

  std::vector<Judgment> judgments = parsed.Judgments();
  EloFit fit = FitWithIntervals(ids, judgments, config.fitter);
  for (const auto& w : fit.warnings) err << "warning: " << w << "\n";

  std::vector<EloTableRow> rows;
  for (const auto& e : fit.estimates) {
    const Method* m = config.FindMethod(e.method);
    rows.push_back({e, m != nullptr ? m->mean_bpp : std::nullopt});
  }
  std::ostringstream table;
  WriteEloTable(table, rows);
  WriteOutput(a.out, out, table.str());
  if (!a.fit_json.empty()) WriteOutput(a.fit_json, out, ToJson(fit).dump(2) + "\n");

  if (!a.reference.empty()) {
    std::vector<EloEstimate> ref;
    for (const auto& r : ReadEloTableFile(a.reference)) ref.push_back(r.estimate);
    Alignment al = AlignElos(fit.estimates, ref);
    err << "alignment vs " << a.reference << ": common " << al.common
        << ", translation " << FormatTrimmed(al.translation) << ", spearman "
        << al.spearman << ", max |delta| " << FormatTrimmed(al.max_abs_diff)
        << "\n";
  }
  return 0;
}

LadderConfig LoadLadders(const std::string& path) {
  return path.empty() ? DefaultLadderConfig() : LadderConfigFromJson(LoadJson(path));
}

int CmdInterp(const std::string& table_path, const std::string& ladders,
              bool omit_gaps, const std::string& out_path, std::ostream& out) {
  std::vector<RatePoint> points = RatePoints(ReadEloTableFile(table_path));
  EquivalentQualityTable table =
      EquivalentQualityReport(LoadLadders(ladders), points);
  std::ostringstream text;
  WriteEquivalentQualityTable(text, table, omit_gaps);
  WriteOutput(out_path, out, text.str());
  return 0;
}

int CmdReport(const std::string& table_path, const std::string& ladders_path,
              const std::vector<double>& anchor_bpps,
              const std::string& plot_data, const std::string& out_path,
              std::ostream& out) {
  std::vector<RatePoint> points = RatePoints(ReadEloTableFile(table_path));
  LadderConfig config = LoadLadders(ladders_path);
  Ladder anchor = BuildLadder(config.anchor, points);
  std::vector<Ladder> ladders = {anchor};
  std::ostringstream text;
  text << "anchor,other,anchor_bpp,elo,other_bpp,reduction\n";
  for (const auto& spec : config.others) {
    Ladder other = BuildLadder(spec, points);
    ladders.push_back(other);
    for (double bpp : anchor_bpps) {
      text << anchor.family << ',' << other.family << ',' << FormatFixed2(bpp)
           << ',';
      try {
        double elo = EloAtBitrate(anchor, bpp);
        double other_bpp = BitrateAtElo(other, elo);
        double r = BitrateReduction(anchor, other, bpp);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", r);
        text << FormatTrimmed(elo) << ',' << FormatFixed2(other_bpp) << ','
             << buf << '\n';
      } catch (const Error& e) {
        if (e.kind() != "out_of_range") throw;
        text << kGapMarker << ',' << kGapMarker << ',' << kGapMarker << '\n';
      }
    }
  }
  WriteOutput(out_path, out, text.str());
  if (!plot_data.empty()) {
    std::ostringstream plot;
    WritePlotData(plot, ladders);
    WriteOutput(plot_data, out, plot.str());
  }
  return 0;
}

struct SimulateArgs {
  std::string spec;
  std::optional<int> answers;
  std::optional<uint64_t> seed;
  std::string ratings_out;
  std::string report_out;
};

int CmdSimulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  SimulationSpec spec =
      a.spec.empty() ? DefaultSimulationSpec() : SimulationSpecFromJson(LoadJson(a.spec));
  if (a.answers) spec.answers = *a.answers;
  if (a.seed) {
    spec.seed = *a.seed;
    spec.scheduler.seed = *a.seed;
  }
  SimulationResult result = Simulate(spec);
  if (!a.ratings_out.empty()) {
    std::ostringstream csv;
    WriteRatings(csv, result.questions, result.answers);
    WriteOutput(a.ratings_out, out, csv.str());
  }
  WriteOutput(a.report_out, out, ToJson(result.report).dump(2) + "\n");
  err << "max |delta| " << FormatTrimmed(result.report.max_abs_diff)
      << ", spearman " << result.report.spearman << ", ranks "
      << (result.report.ranks_exact ? "exact" : "NOT exact") << ", refits "
      << result.report.refits << "\n";
  return 0;
}

struct CorpusArgs {
  std::string config;
  std::string templates;
  std::string manifest = "corpus_manifest.json";
  std::string golden_encoder;
  int jobs = 1;
  bool run_encoders = false;
};

int CmdBuildCorpus(const CorpusArgs& a, std::ostream& out, std::ostream& err) {
  StudyConfig config = LoadStudyConfig(a.config);
  CorpusRequest req;
  req.images = config.images;
  req.methods = config.methods;
  req.output_template = config.service.variant_path_template;
  req.golden_template = config.service.golden_path_template;
  req.golden_quality = config.golden.heavy_quality;
  if (!a.golden_encoder.empty()) req.golden_encoder = a.golden_encoder;
  req.parallelism = a.jobs;
  req.allow_external_commands = a.run_encoders;
  if (!a.templates.empty()) {
    json doc = LoadJson(a.templates);
    for (const auto& [encoder, t] : doc.items()) {
      CommandTemplate tmpl;
      tmpl.command = t.at("command").get<std::string>();
      std::string style = t.value("subsampling_style", "digits");
      if (style != "digits" && style != "factor") {
        throw Error("config", "subsampling_style must be digits or factor");
      }
      tmpl.style = style == "factor" ? CommandTemplate::SubsamplingStyle::kFactor
                                     : CommandTemplate::SubsamplingStyle::kDigits;
      req.templates[encoder] = tmpl;
    }
  }
  std::ifstream previous(a.manifest);
  if (previous) {
    try {
      req.previous = CorpusManifestFromJson(json::parse(previous));
    } catch (const json::exception&) {
      err << "warning: ignoring unreadable manifest " << a.manifest << "\n";
    }
  }
  CorpusManifest manifest = BuildCorpus(req);
  WriteOutput(a.manifest, out, ToJson(manifest).dump(2) + "\n");
  err << manifest.entries.size() << " outputs (" << manifest.skipped
      << " reused)\n";
  std::ostringstream stats;
  stats << "method,bpp\n";
  for (const auto& [method, bpp] : CorpusStats(manifest)) {
    stats << method << ',' << FormatTrimmed(bpp) << '\n';
  }
  out << stats.str();
  return 0;
}

struct ServeArgs {
  std::string config;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string log;
  std::optional<uint64_t> seed;
  std::optional<double> lease_seconds;
  std::optional<int> refresh_every;
  std::optional<double> golden_rate;
};

volatile std::sig_atomic_t g_stop = 0;

void StopOnSignal(int) { g_stop = 1; }

int CmdServe(const ServeArgs& a, std::ostream& err) {
  json doc = LoadJson(a.config);
  if (a.seed) doc["scheduler"]["seed"] = *a.seed;
  if (a.refresh_every) doc["scheduler"]["refresh_every"] = *a.refresh_every;
  if (a.golden_rate) doc["golden"]["rate"] = *a.golden_rate;
  if (a.lease_seconds) doc["service"]["lease_seconds"] = *a.lease_seconds;
  if (!a.log.empty()) doc["service"]["log_path"] = a.log;
  StudyConfig config = ValidateStudyConfig(doc);
  Service service(config);
  g_stop = 0;
  std::signal(SIGINT, StopOnSignal);
  std::signal(SIGTERM, StopOnSignal);
  int port = service.Start(a.host, a.port);
  err << "serving study \"" << config.name << "\" on " << a.host << ":" << port
      << ", log " << config.service.log_path << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  service.Stop();
  return 0;
}

}  // namespace

int ExitCodeForError(const std::string& kind) {
  if (kind == "config" || kind == "config_mismatch") return 3;
  if (kind == "parse" || kind == "empty_file" || kind == "missing_column" ||
      kind == "no_answers" || kind == "unknown_method" ||
      kind == "unknown_rater" || kind == "missing_image" ||
      kind == "corrupt_log" || kind == "incomplete_manifest" ||
      kind == "no_common_methods" || kind == "non_monotone_ladder" ||
      kind == "ladder_too_short" || kind == "zero_pixels") {
    return 4;
  }
  if (kind == "non_convergence" || kind == "singular_curvature" ||
      kind == "out_of_range" || kind == "all_raters_blocked") {
    return 5;
  }
  if (kind == "capability") return 6;
  if (kind == "io" || kind == "command_failed") return 7;
  return 1;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"paireval: pairwise image-quality study tooling"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<uint64_t> seed;
  app.add_option("--seed", seed, "Seed for the scheduler and simulator");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit Elo scores to a ratings file");
  fit_cmd->add_option("ratings", fit.ratings, "Ratings file")->required();
  fit_cmd->add_option("--config", fit.config, "Study config (JSON)")->required();
  fit_cmd->add_option("--mapping", fit.mapping, "Column mapping (JSON)");
  fit_cmd->add_option("--out", fit.out, "Elo table output (default stdout)");
  fit_cmd->add_option("--fit-json", fit.fit_json, "Full fit as JSON");
  fit_cmd->add_option("--reference", fit.reference,
                      "Elo table to align against and compare");

  std::string interp_table, interp_ladders, interp_out;
  bool omit_gaps = false;
  auto* interp_cmd =
      app.add_subcommand("interp", "Equivalent-quality table from an Elo table");
  interp_cmd->add_option("table", interp_table, "Elo table with bpp")->required();
  interp_cmd->add_option("--ladders", interp_ladders, "Ladder config (JSON)");
  interp_cmd->add_flag("--omit-gaps", omit_gaps, "Drop rows outside a ladder");
  interp_cmd->add_option("--out", interp_out, "Output (default stdout)");

  std::string report_table, report_ladders, report_out, plot_data;
  std::vector<double> anchor_bpps = {2.1};
  auto* report_cmd =
      app.add_subcommand("report", "Bitrate reductions at given anchor bitrates");
  report_cmd->add_option("table", report_table, "Elo table with bpp")->required();
  report_cmd->add_option("--ladders", report_ladders, "Ladder config (JSON)");
  report_cmd->add_option("--anchor-bpp", anchor_bpps, "Anchor bitrates")
      ->capture_default_str();
  report_cmd->add_option("--plot-data", plot_data, "Write plot data CSV here");
  report_cmd->add_option("--out", report_out, "Output (default stdout)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a synthetic study");
  sim_cmd->add_option("--spec", sim.spec, "Simulation spec (JSON)");
  sim_cmd->add_option("--answers", sim.answers, "Number of answers");
  sim_cmd->add_option("--ratings-out", sim.ratings_out, "Synthetic ratings CSV");
  sim_cmd->add_option("--report-out", sim.report_out,
                      "Recovery report JSON (default stdout)");

  CorpusArgs corpus;
  auto* corpus_cmd =
      app.add_subcommand("build-corpus", "Encode every (image, method) variant");
  corpus_cmd->add_option("--config", corpus.config, "Study config (JSON)")
      ->required();
  corpus_cmd->add_option("--templates", corpus.templates,
                         "Command templates per encoder (JSON)");
  corpus_cmd->add_option("--manifest", corpus.manifest, "Manifest path")
      ->capture_default_str();
  corpus_cmd->add_option("--golden-encoder", corpus.golden_encoder,
                         "Also encode heavily degraded golden variants");
  corpus_cmd->add_option("--jobs", corpus.jobs, "Parallel encoder commands")
      ->check(CLI::PositiveNumber);
  corpus_cmd->add_flag("--run-encoders", corpus.run_encoders,
                       "Allow running external encoder commands");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the rating service");
  serve_cmd->add_option("--config", serve.config, "Study config (JSON)")
      ->required();
  serve_cmd->add_option("--host", serve.host)->capture_default_str();
  serve_cmd->add_option("--port", serve.port)->capture_default_str();
  serve_cmd->add_option("--log", serve.log, "Event log path");
  serve_cmd->add_option("--lease-seconds", serve.lease_seconds);
  serve_cmd->add_option("--refresh-every", serve.refresh_every);
  serve_cmd->add_option("--golden-rate", serve.golden_rate);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit_cmd) return CmdFit(fit, out, err);
    if (*interp_cmd) {
      return CmdInterp(interp_table, interp_ladders, omit_gaps, interp_out, out);
    }
    if (*report_cmd) {
      return CmdReport(report_table, report_ladders, anchor_bpps, plot_data,
                       report_out, out);
    }
    if (*sim_cmd) {
      sim.seed = seed;
      return CmdSimulate(sim, out, err);
    }
    if (*corpus_cmd) return CmdBuildCorpus(corpus, out, err);
    if (*serve_cmd) {
      serve.seed = seed;
      return CmdServe(serve, err);
    }
  } catch (const ConfigError& e) {
    err << "error: invalid configuration\n";
    for (const auto& p : e.problems()) err << "  " << p << "\n";
    return ExitCodeForError(e.kind());
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return ExitCodeForError(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace paireval
