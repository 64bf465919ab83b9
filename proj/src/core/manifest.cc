// core/manifest.cc

// Copyright 2026  The svbn Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/manifest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/common.h"

namespace svbn {

CorpusManifest LoadManifest(const std::string& path, bool check_paths) {
  std::ifstream is(path);
  if (!is) Throw(Status::kIo, "cannot open manifest: " + path);
  CorpusManifest manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    ManifestEntry entry;
    if (!std::getline(fields, entry.utterance_id, '\t') ||
        !std::getline(fields, entry.speaker_id, '\t') ||
        !std::getline(fields, entry.phrase_id, '\t') ||
        !std::getline(fields, entry.path, '\t')) {
      Throw(Status::kFormat,
            path + ":" + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    if (entry.utterance_id.empty() || entry.speaker_id.empty() || entry.phrase_id.empty())
      Throw(Status::kFormat, path + ":" + std::to_string(line_no) + ": empty id");
    if (check_paths && !std::filesystem::exists(entry.path))
      Throw(Status::kDependency,
            path + ":" + std::to_string(line_no) + ": missing file " + entry.path);
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void SaveManifest(const std::string& path, const CorpusManifest& manifest) {
  std::ofstream os(path);
  if (!os) Throw(Status::kIo, "cannot write manifest: " + path);
  for (const auto& e : manifest.entries)
    os << e.utterance_id << '\t' << e.speaker_id << '\t' << e.phrase_id << '\t' << e.path
       << '\n';
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

}  // namespace svbn
