// core/synth.h

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

#ifndef SVBN_CORE_SYNTH_H_
#define SVBN_CORE_SYNTH_H_

#include <string>

#include "core/common.h"

namespace svbn {

// Desk-scale synthetic corpus. Each (speaker, phrase) pair owns a latent
// trajectory: a speaker offset plus a per-phrase sequence of segment anchors;
// sessions are Gaussian perturbations of that trajectory. The last session of
// each pair is the test session, the earlier ones enroll and train.
struct SyntheticCorpusSpec {
  int n_speakers = 20;
  int n_phrases = 5;
  int sessions_per_phrase = 3;
  int frames_per_utterance = 150;
  int dim = 57;
  double speaker_scale = 1.0;
  double phrase_scale = 1.0;
  double noise_scale = 1.1;
  int anchors_per_phrase = 8;
  uint64_t seed = 1234;

  void Validate() const;
};

struct SynthOutput {
  std::string train_manifest;
  std::string enroll_manifest;
  std::string test_manifest;
  std::string trials;
  int utterances = 0;
};

// Writes feature files, the three manifests, and the four-way trial list
// under out_dir. Byte-identical output for a fixed spec.
SynthOutput SynthCorpus(const SyntheticCorpusSpec& spec, const std::string& out_dir);

}  // namespace svbn

#endif  // SVBN_CORE_SYNTH_H_
