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

// Building the degraded corpus by running external encoder commands, and
// per-method bitrate statistics over it.

#ifndef PAIREVAL_CORPUS_H_
#define PAIREVAL_CORPUS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "paireval/domain.h"

namespace paireval {

// Shell command run once per (image, method). Placeholders: {input},
// {output}, {quality}, {subsampling}. Paths are shell-quoted on expansion.
struct CommandTemplate {
  enum class SubsamplingStyle {
    kDigits,  // 444, 422, 420
    kFactor,  // 4:4:4, 4:2:2, 4:2:0
  };
  std::string command;
  SubsamplingStyle style = SubsamplingStyle::kDigits;
};

// Shipped defaults keyed by encoder name: cjpegli for jpegli, ImageMagick
// convert against the mozjpeg or libjpeg-turbo shared library for the others.
std::map<std::string, CommandTemplate> DefaultCommandTemplates();

// Throws Error{"config"} naming an unknown placeholder or unbalanced brace.
void ValidateTemplate(const CommandTemplate& t);

std::string ExpandTemplate(const CommandTemplate& t, const std::string& input,
                           const std::string& output, int quality,
                           Subsampling subsampling);

// The executable a command needs (first word after env and VAR=value).
std::string RequiredBinary(const std::string& command);

struct CorpusEntry {
  std::string image;
  std::string method;
  std::string path;
  uint64_t file_size = 0;
  double bpp = 0.0;

  bool operator==(const CorpusEntry&) const = default;
};

struct CorpusManifest {
  std::vector<ImageRef> images;
  std::vector<Method> methods;
  // Sorted by (method, image). Golden variants use method "golden-q<q>".
  std::vector<CorpusEntry> entries;
  int skipped = 0;  // Outputs reused from a previous run; not serialized.
};

nlohmann::json ToJson(const CorpusManifest& manifest);
CorpusManifest CorpusManifestFromJson(const nlohmann::json& doc);

struct CorpusRequest {
  std::vector<ImageRef> images;
  std::vector<Method> methods;
  // Output path pattern; placeholders {method} and {image}.
  std::string output_template = "corpus/{method}/{image}.jpeg";
  std::map<std::string, CommandTemplate> templates =
      DefaultCommandTemplates();
  int parallelism = 1;
  // External commands run only when this is set; otherwise BuildCorpus
  // throws Error{"capability"}.
  bool allow_external_commands = false;
  // When set, heavily degraded golden variants are also encoded with this
  // encoder's template at `golden_quality` (4:2:0) into `golden_template`
  // (placeholders {quality} and {image}).
  std::optional<std::string> golden_encoder;
  int golden_quality = 50;
  std::string golden_template = "corpus/golden-q{quality}/{image}.jpeg";
  // Manifest of a previous run: outputs whose size still matches are kept.
  std::optional<CorpusManifest> previous;
};

// Runs every (image, method) command. Throws Error{"capability"} naming a
// missing binary, Error{"missing_image"}, Error{"config"} for template
// problems (before anything runs) and Error{"command_failed"} with the
// captured output.
CorpusManifest BuildCorpus(const CorpusRequest& request);

// Image width and height from a PNG header, if the file is a PNG.
std::optional<std::pair<int, int>> ReadPngDimensions(const std::string& path);

// Mean per-image bpp per method. Throws Error{"incomplete_manifest"} listing
// missing (image, method) pairs.
std::map<std::string, double> CorpusStats(const CorpusManifest& manifest);

}  // namespace paireval

#endif  // PAIREVAL_CORPUS_H_
