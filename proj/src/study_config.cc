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

#include "paireval/study_config.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace paireval {
namespace {

using nlohmann::json;

std::string JoinProblems(const std::vector<std::string>& problems) {
  std::string out = "invalid study config:";
  for (const auto& p : problems) out += "\n  - " + p;
  return out;
}

// Reads typed fields out of a JSON object, recording problems instead of
// throwing so that one pass reports everything.
class Reader {
 public:
  Reader(const json& obj, std::string where, std::vector<std::string>* problems)
      : obj_(obj), where_(std::move(where)), problems_(problems) {}

  template <typename T>
  void Get(const char* key, T* out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      *out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      problems_->push_back(where_ + "." + key + ": wrong type");
    }
  }

  void CheckUnknown() {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) {
        problems_->push_back(where_ + ": unknown key \"" + key + "\"");
      }
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::vector<std::string>* problems_;
  std::set<std::string> seen_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error("config", JoinProblems(problems)), problems_(std::move(problems)) {}

const Method* StudyConfig::FindMethod(std::string_view id) const {
  for (const auto& m : methods) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

std::vector<std::string> StudyConfig::MethodIds() const {
  std::vector<std::string> ids;
  ids.reserve(methods.size());
  for (const auto& m : methods) ids.push_back(m.id);
  return ids;
}

StudyConfig ValidateStudyConfig(const json& doc) {
  std::vector<std::string> problems;
  StudyConfig config;
  if (!doc.is_object()) {
    throw ConfigError({"top level must be an object"});
  }
  Reader top(doc, "config", &problems);
  top.Get("name", &config.name);

  json methods = json::array();
  top.Get("methods", &methods);
  json grid = json::object();
  top.Get("quality_grid", &grid);
  for (const auto& [encoder, qualities] : grid.items()) {
    try {
      config.quality_grid[encoder] = qualities.get<std::vector<int>>();
    } catch (const json::exception&) {
      problems.push_back("quality_grid." + encoder + ": expected integers");
    }
  }

  std::set<std::string> ids;
  if (!methods.is_array()) {
    problems.push_back("methods: expected a list");
    methods = json::array();
  }
  for (size_t i = 0; i < methods.size(); ++i) {
    const json& entry = methods[i];
    std::string id;
    std::optional<double> bpp;
    if (entry.is_string()) {
      id = entry.get<std::string>();
    } else if (entry.is_object()) {
      Reader r(entry, "methods[" + std::to_string(i) + "]", &problems);
      r.Get("id", &id);
      double value = -1.0;
      if (entry.contains("bpp")) {
        r.Get("bpp", &value);
        bpp = value;
      }
      r.CheckUnknown();
    } else {
      problems.push_back("methods[" + std::to_string(i) +
                         "]: expected id string or object");
      continue;
    }
    Method m;
    try {
      m = ParseMethodId(id);
    } catch (const Error& e) {
      problems.push_back(e.what());
      continue;
    }
    m.mean_bpp = bpp;
    if (bpp && !(*bpp > 0.0)) {
      problems.push_back("method " + id + ": bpp must be > 0");
    }
    auto grid_it = config.quality_grid.find(m.encoder.name);
    if (grid_it != config.quality_grid.end() &&
        std::find(grid_it->second.begin(), grid_it->second.end(),
                  m.quality) == grid_it->second.end()) {
      problems.push_back("method " + id + ": quality " +
                         std::to_string(m.quality) +
                         " not in the declared grid");
    }
    if (!ids.insert(id).second) {
      problems.push_back("duplicate method id \"" + id + "\"");
      continue;
    }
    config.methods.push_back(std::move(m));
  }
  if (methods.empty()) problems.push_back("empty method set");

  json images = json::array();
  top.Get("images", &images);
  std::set<std::string> image_ids;
  for (size_t i = 0; i < images.size(); ++i) {
    Reader r(images[i], "images[" + std::to_string(i) + "]", &problems);
    ImageRef img;
    r.Get("id", &img.id);
    r.Get("width", &img.width);
    r.Get("height", &img.height);
    r.Get("path", &img.source_path);
    r.CheckUnknown();
    if (img.id.empty()) {
      problems.push_back("images[" + std::to_string(i) + "]: missing id");
    } else if (!image_ids.insert(img.id).second) {
      problems.push_back("duplicate image id \"" + img.id + "\"");
    }
    if (img.width <= 0 || img.height <= 0) {
      problems.push_back("image " + img.id + ": width and height must be > 0");
    }
    config.images.push_back(std::move(img));
  }

  json golden = json::object();
  top.Get("golden", &golden);
  {
    Reader r(golden, "golden", &problems);
    r.Get("rate", &config.golden.rate);
    r.Get("threshold", &config.golden.threshold);
    r.Get("heavy_quality", &config.golden.heavy_quality);
    r.CheckUnknown();
  }
  if (config.golden.threshold < 1) {
    problems.push_back("golden threshold K must be >= 1");
  }
  if (!(config.golden.rate >= 0.0 && config.golden.rate <= 1.0)) {
    problems.push_back("golden rate must lie in [0, 1]");
  }
  if (config.golden.heavy_quality < 1 || config.golden.heavy_quality > 100) {
    problems.push_back("golden heavy_quality must lie in 1..100");
  }

  json scheduler = json::object();
  top.Get("scheduler", &scheduler);
  {
    Reader r(scheduler, "scheduler", &problems);
    r.Get("refresh_every", &config.scheduler.refresh_every);
    r.Get("repeat_window", &config.scheduler.repeat_window);
    r.Get("seed", &config.scheduler.seed);
    r.CheckUnknown();
  }
  if (config.scheduler.refresh_every < 1) {
    problems.push_back("scheduler refresh_every must be >= 1");
  }
  if (config.scheduler.repeat_window < 0) {
    problems.push_back("scheduler repeat_window must be >= 0");
  }

  json fitter = json::object();
  top.Get("fitter", &fitter);
  {
    FitterSettings& f = config.fitter;
    Reader r(fitter, "fitter", &problems);
    r.Get("elo_mean", &f.priors.elo_mean);
    r.Get("elo_sd", &f.priors.elo_sd);
    r.Get("noise_alpha", &f.priors.noise_alpha);
    r.Get("noise_beta", &f.priors.noise_beta);
    r.Get("noise_max", &f.noise_max);
    r.Get("golden_gap", &f.golden_gap);
    r.Get("gradient_tolerance", &f.gradient_tolerance);
    r.Get("max_iterations", &f.max_iterations);
    r.Get("interval_level", &f.interval_level);
    r.CheckUnknown();
    if (!(f.priors.elo_sd > 0)) problems.push_back("fitter elo_sd must be > 0");
    if (!(f.priors.noise_alpha > 0) || !(f.priors.noise_beta > 0)) {
      problems.push_back("fitter noise prior shapes must be > 0");
    }
    if (!(f.noise_max > 0 && f.noise_max <= 1)) {
      problems.push_back("fitter noise_max must lie in (0, 1]");
    }
    if (!(f.gradient_tolerance > 0)) {
      problems.push_back("fitter gradient_tolerance must be > 0");
    }
    if (f.max_iterations < 1) {
      problems.push_back("fitter max_iterations must be >= 1");
    }
    if (!(f.interval_level > 0 && f.interval_level < 1)) {
      problems.push_back("fitter interval_level must lie in (0, 1)");
    }
  }

  json service = json::object();
  top.Get("service", &service);
  {
    Reader r(service, "service", &problems);
    double lease_seconds = config.service.lease_ms / 1000.0;
    r.Get("lease_seconds", &lease_seconds);
    config.service.lease_ms = static_cast<int64_t>(lease_seconds * 1000.0);
    r.Get("log_path", &config.service.log_path);
    r.Get("variant_path_template", &config.service.variant_path_template);
    r.Get("golden_path_template", &config.service.golden_path_template);
    r.CheckUnknown();
    if (config.service.lease_ms <= 0) {
      problems.push_back("service lease_seconds must be > 0");
    }
  }
  top.CheckUnknown();

  if (!problems.empty()) throw ConfigError(std::move(problems));
  return config;
}

StudyConfig LoadStudyConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open study config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path + ": " + e.what()});
  }
  return ValidateStudyConfig(doc);
}

json ToJson(const StudyConfig& config) {
  json doc;
  doc["name"] = config.name;
  json methods = json::array();
  for (const auto& m : config.methods) {
    if (m.mean_bpp) {
      methods.push_back({{"id", m.id}, {"bpp", *m.mean_bpp}});
    } else {
      methods.push_back(m.id);
    }
  }
  doc["methods"] = methods;
  json images = json::array();
  for (const auto& img : config.images) {
    images.push_back({{"id", img.id},
                      {"width", img.width},
                      {"height", img.height},
                      {"path", img.source_path}});
  }
  doc["images"] = images;
  if (!config.quality_grid.empty()) doc["quality_grid"] = config.quality_grid;
  doc["golden"] = {{"rate", config.golden.rate},
                   {"threshold", config.golden.threshold},
                   {"heavy_quality", config.golden.heavy_quality}};
  doc["scheduler"] = {{"refresh_every", config.scheduler.refresh_every},
                      {"repeat_window", config.scheduler.repeat_window},
                      {"seed", config.scheduler.seed}};
  const FitterSettings& f = config.fitter;
  doc["fitter"] = {{"elo_mean", f.priors.elo_mean},
                   {"elo_sd", f.priors.elo_sd},
                   {"noise_alpha", f.priors.noise_alpha},
                   {"noise_beta", f.priors.noise_beta},
                   {"noise_max", f.noise_max},
                   {"golden_gap", f.golden_gap},
                   {"gradient_tolerance", f.gradient_tolerance},
                   {"max_iterations", f.max_iterations},
                   {"interval_level", f.interval_level}};
  doc["service"] = {
      {"lease_seconds", config.service.lease_ms / 1000.0},
      {"log_path", config.service.log_path},
      {"variant_path_template", config.service.variant_path_template},
      {"golden_path_template", config.service.golden_path_template}};
  return doc;
}

}  // namespace paireval
