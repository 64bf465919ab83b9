// core/pipeline.h

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

#ifndef SVBN_CORE_PIPELINE_H_
#define SVBN_CORE_PIPELINE_H_

#include <optional>
#include <string>
#include <vector>

#include "core/config.h"

namespace svbn {

struct StageOptions {
  std::string stage_dir;
  bool force = false;
  std::optional<uint64_t> seed_override;  // replaces every *.seed key
  bool quiet = false;
};

// Stage order: features/synth -> targets -> train-dnn -> extract-bn ->
// train-ubm [-> train-tv -> train-plda] -> enroll -> score -> evaluate;
// fuse combines score files across stage directories.
const std::vector<std::string>& StageNames();

struct StageResult {
  bool skipped = false;          // provenance matched; nothing to do
  std::string summary;           // one-line outcome
};

// Runs one stage against the artifact directory. Missing dependencies name
// the stage that must run first; a provenance mismatch with an existing
// artifact refuses to overwrite unless force is set. A lock file makes the
// directory single-owner while a stage runs.
StageResult RunStage(const Config& config, const std::string& stage,
                     const StageOptions& options);

}  // namespace svbn

#endif  // SVBN_CORE_PIPELINE_H_
