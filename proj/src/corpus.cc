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

#include "paireval/corpus.h"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "paireval/analysis.h"
#include "paireval/serialization.h"

namespace paireval {
namespace {

namespace fs = std::filesystem;

const std::set<std::string>& KnownPlaceholders() {
  static const std::set<std::string> known = {"input", "output", "quality",
                                              "subsampling"};
  return known;
}

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string SubsamplingToken(Subsampling s, CommandTemplate::SubsamplingStyle style) {
  bool digits = style == CommandTemplate::SubsamplingStyle::kDigits;
  switch (s) {
    case Subsampling::kYuv444:
      return digits ? "444" : "4:4:4";
    case Subsampling::kYuv422:
      return digits ? "422" : "4:2:2";
    case Subsampling::kYuv420:
      return digits ? "420" : "4:2:0";
  }
  return "444";
}

// Replaces {key} occurrences using `lookup`; unknown keys are an error.
template <typename F>
std::string Substitute(const std::string& pattern, F lookup) {
  std::string out;
  for (size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '{') {
      out += pattern[i];
      continue;
    }
    size_t close = pattern.find('}', i);
    if (close == std::string::npos) {
      throw Error("config", "unbalanced '{' in \"" + pattern + "\"");
    }
    out += lookup(pattern.substr(i + 1, close - i - 1));
    i = close;
  }
  return out;
}

std::string PathFor(const std::string& pattern, const std::string& method,
                    const std::string& image, int quality) {
  return Substitute(pattern, [&](const std::string& key) -> std::string {
    if (key == "method") return method;
    if (key == "image") return image;
    if (key == "quality") return std::to_string(quality);
    throw Error("config", "unknown placeholder {" + key + "} in \"" +
                              pattern + "\"");
  });
}

bool OnPath(const std::string& binary) {
  if (binary.find('/') != std::string::npos) {
    return ::access(binary.c_str(), X_OK) == 0;
  }
  const char* path = std::getenv("PATH");
  if (path == nullptr) return false;
  std::stringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    if (::access((dir + "/" + binary).c_str(), X_OK) == 0) return true;
  }
  return false;
}

struct Job {
  std::string image;
  std::string method;
  std::string input;
  std::string output;
  std::string command;
  ImageRef ref;
};

// Runs `command` through the shell, returning exit status and combined
// output.
std::pair<int, std::string> RunCommand(const std::string& command) {
  std::string full = "( " + command + " ) 2>&1";
  FILE* pipe = ::popen(full.c_str(), "r");
  if (pipe == nullptr) return {-1, "popen failed"};
  std::string output;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    output.append(buf.data(), n);
  }
  int status = ::pclose(pipe);
  return {status, output};
}

}  // namespace

std::map<std::string, CommandTemplate> DefaultCommandTemplates() {
  using Style = CommandTemplate::SubsamplingStyle;
  auto convert = [](const std::string& lib) {
    return CommandTemplate{
        "env LD_LIBRARY_PATH=$HOME/" + lib +
            "/build/ convert {input} -quality {quality} -sampling-factor "
            "{subsampling} {output}",
        Style::kFactor};
  };
  return {
      {"jpegli",
       {"cjpegli {input} {output} --quality {quality} "
        "--chroma_subsampling={subsampling}",
        Style::kDigits}},
      {"libjpeg-turbo", convert("libjpeg-turbo")},
      {"mozjpeg", convert("mozjpeg")},
  };
}

void ValidateTemplate(const CommandTemplate& t) {
  Substitute(t.command, [&](const std::string& key) -> std::string {
    if (!KnownPlaceholders().count(key)) {
      throw Error("config", "unknown placeholder {" + key +
                                "} in command \"" + t.command + "\"");
    }
    return {};
  });
}

std::string ExpandTemplate(const CommandTemplate& t, const std::string& input,
                           const std::string& output, int quality,
                           Subsampling subsampling) {
  return Substitute(t.command, [&](const std::string& key) -> std::string {
    if (key == "input") return ShellQuote(input);
    if (key == "output") return ShellQuote(output);
    if (key == "quality") return std::to_string(quality);
    if (key == "subsampling") return SubsamplingToken(subsampling, t.style);
    throw Error("config", "unknown placeholder {" + key + "} in command \"" +
                              t.command + "\"");
  });
}

std::string RequiredBinary(const std::string& command) {
  std::stringstream words(command);
  std::string word;
  bool after_env = false;
  while (words >> word) {
    if (word == "env" && !after_env) {
      after_env = true;
      continue;
    }
    if (word.find('=') != std::string::npos && word.front() != '{') continue;
    return word;
  }
  return {};
}

nlohmann::json ToJson(const CorpusManifest& manifest) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& i : manifest.images) images.push_back(ToJson(i));
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : manifest.methods) methods.push_back(ToJson(m));
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"image", e.image},
                       {"method", e.method},
                       {"path", e.path},
                       {"file_size", e.file_size},
                       {"bpp", e.bpp}});
  }
  return {{"images", images}, {"methods", methods}, {"entries", entries}};
}

CorpusManifest CorpusManifestFromJson(const nlohmann::json& doc) {
  CorpusManifest m;
  try {
    for (const auto& i : doc.at("images")) m.images.push_back(ImageRefFromJson(i));
    for (const auto& x : doc.at("methods")) m.methods.push_back(MethodFromJson(x));
    for (const auto& e : doc.at("entries")) {
      m.entries.push_back({e.at("image").get<std::string>(),
                           e.at("method").get<std::string>(),
                           e.at("path").get<std::string>(),
                           e.at("file_size").get<uint64_t>(),
                           e.at("bpp").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse", std::string("corpus manifest: ") + e.what());
  }
  return m;
}

std::optional<std::pair<int, int>> ReadPngDimensions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char h[24];
  if (!in.read(reinterpret_cast<char*>(h), sizeof(h))) return std::nullopt;
  static const unsigned char kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a,
                                        '\n'};
  if (!std::equal(kSig, kSig + 8, h) || std::string(h + 12, h + 16) != "IHDR") {
    return std::nullopt;
  }
  auto be32 = [&](int at) {
    return static_cast<int>((uint32_t{h[at]} << 24) | (uint32_t{h[at + 1]} << 16) |
                            (uint32_t{h[at + 2]} << 8) | h[at + 3]);
  };
  return std::make_pair(be32(16), be32(20));
}

CorpusManifest BuildCorpus(const CorpusRequest& request) {
  CorpusManifest manifest;
  manifest.images = request.images;
  manifest.methods = request.methods;
  if (request.images.empty()) return manifest;

  // Everything that can be checked is checked before the first command runs.
  std::vector<Job> jobs;
  std::set<std::string> binaries;
  auto add_job = [&](const ImageRef& image, const std::string& method,
                     const std::string& encoder, int quality, Subsampling s,
                     const std::string& output) {
    auto t = request.templates.find(encoder);
    if (t == request.templates.end()) {
      throw Error("config", "no command template for encoder \"" + encoder + "\"");
    }
    ValidateTemplate(t->second);
    binaries.insert(RequiredBinary(t->second.command));
    jobs.push_back({image.id, method, image.source_path, output,
                    ExpandTemplate(t->second, image.source_path, output,
                                   quality, s),
                    image});
  };
  for (const auto& image : request.images) {
    if (image.source_path.empty() || !fs::exists(image.source_path)) {
      throw Error("missing_image", "source image for \"" + image.id +
                                       "\" not found: " + image.source_path);
    }
    for (const auto& m : request.methods) {
      add_job(image, m.id, m.encoder.name, m.quality, m.subsampling,
              PathFor(request.output_template, m.id, image.id, m.quality));
    }
    if (request.golden_encoder) {
      add_job(image, "golden-q" + std::to_string(request.golden_quality),
              *request.golden_encoder, request.golden_quality,
              Subsampling::kYuv420,
              PathFor(request.golden_template, "", image.id,
                      request.golden_quality));
    }
  }
  if (!request.allow_external_commands) {
    throw Error("capability",
                "external encoder commands are disabled; enable them "
                "explicitly to build the corpus");
  }
  for (const auto& b : binaries) {
    if (b.empty() || !OnPath(b)) {
      throw Error("capability", "encoder binary \"" + b + "\" not found on PATH");
    }
  }

  std::map<std::pair<std::string, std::string>, uint64_t> previous;
  if (request.previous) {
    for (const auto& e : request.previous->entries) {
      previous[{e.method, e.path}] = e.file_size;
    }
  }

  std::vector<std::optional<CorpusEntry>> results(jobs.size());
  std::atomic<size_t> next{0};
  std::atomic<int> skipped{0};
  std::mutex error_mu;
  std::optional<Error> error;
  auto worker = [&]() {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      {
        std::lock_guard<std::mutex> lock(error_mu);
        if (error) return;
      }
      const Job& job = jobs[i];
      try {
        std::error_code ec;
        auto it = previous.find({job.method, job.output});
        bool reuse = it != previous.end() && fs::exists(job.output) &&
                     fs::file_size(job.output, ec) == it->second;
        if (reuse) {
          ++skipped;
        } else {
          fs::path parent = fs::path(job.output).parent_path();
          if (!parent.empty()) fs::create_directories(parent);
          auto [status, output] = RunCommand(job.command);
          if (status != 0) {
            throw Error("command_failed", "command for " + job.method + "/" +
                                              job.image + " exited with status " +
                                              std::to_string(status) + ": " +
                                              job.command + "\n" + output);
          }
          if (!fs::exists(job.output)) {
            throw Error("command_failed", "command for " + job.method + "/" +
                                              job.image + " wrote no output " +
                                              job.output + "\n" + output);
          }
        }
        ImageRef ref = job.ref;
        if (auto dims = ReadPngDimensions(job.input)) {
          ref.width = dims->first;
          ref.height = dims->second;
        }
        uint64_t size = fs::file_size(job.output);
        results[i] = CorpusEntry{job.image, job.method, job.output, size,
                                 BitsPerPixel(size, ref.width, ref.height)};
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = e;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = Error("io", e.what());
      }
    }
  };
  int threads = std::max(1, request.parallelism);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) throw *error;

  for (auto& r : results) manifest.entries.push_back(std::move(*r));
  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) {
              return std::tie(a.method, a.image) < std::tie(b.method, b.image);
            });
  manifest.skipped = skipped;
  return manifest;
}

std::map<std::string, double> CorpusStats(const CorpusManifest& manifest) {
  std::map<std::pair<std::string, std::string>, double> bpp;
  for (const auto& e : manifest.entries) bpp[{e.method, e.image}] = e.bpp;
  std::vector<std::string> missing;
  std::map<std::string, double> out;
  for (const auto& m : manifest.methods) {
    std::vector<double> rates;
    for (const auto& image : manifest.images) {
      auto it = bpp.find({m.id, image.id});
      if (it == bpp.end()) {
        missing.push_back(m.id + "/" + image.id);
      } else {
        rates.push_back(it->second);
      }
    }
    if (!rates.empty()) {
      double sum = 0.0;
      for (double r : rates) sum += r;
      out[m.id] = sum / rates.size();
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (size_t i = 0; i < missing.size() && i < 20; ++i) {
      list += (i ? ", " : "") + missing[i];
    }
    if (missing.size() > 20) list += ", ...";
    throw Error("incomplete_manifest", std::to_string(missing.size()) +
                                           " (method/image) outputs missing: " +
                                           list);
  }
  return out;
}

}  // namespace paireval
