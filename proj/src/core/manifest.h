// core/manifest.h

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

#ifndef SVBN_CORE_MANIFEST_H_
#define SVBN_CORE_MANIFEST_H_

#include <string>
#include <vector>

namespace svbn {

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string phrase_id;
  std::string path;
};

/// One record per utterance: utterance_id, speaker_id, phrase_id, path
/// (UTF-8, tab-separated, one per line).
struct CorpusManifest {
  std::vector<ManifestEntry> entries;
};

// check_paths verifies every referenced file is resolvable at load time.
CorpusManifest LoadManifest(const std::string& path, bool check_paths = true);
void SaveManifest(const std::string& path, const CorpusManifest& manifest);

}  // namespace svbn

#endif  // SVBN_CORE_MANIFEST_H_
