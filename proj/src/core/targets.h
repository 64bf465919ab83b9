// core/targets.h

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

#ifndef SVBN_CORE_TARGETS_H_
#define SVBN_CORE_TARGETS_H_

#include <map>
#include <string>
#include <vector>

#include "core/common.h"
#include "core/features.h"
#include "core/manifest.h"

namespace svbn {

enum class TargetScheme : uint8_t { kSpeaker = 0, kUtcl = 1, kStcl = 2, kApc = 3 };

TargetScheme ParseTargetScheme(const std::string& name);
std::string TargetSchemeName(TargetScheme scheme);

// Row t is the concatenation of frames t-C/2..t+C/2 with edge replication;
// context must be odd.
Matrix SpliceContext(const Matrix& frames, int context);

// Stable mapping: speaker ids sorted lexicographically, indices 0..n-1.
// A single-speaker manifest is a configuration error.
std::map<std::string, int> LabelSpeakers(const CorpusManifest& manifest);

// Utterance split into c uniform segments; the first T mod c segments take
// the extra frame; frame in segment n gets label n. T < c is reported by
// returning an empty vector (caller records the skip).
std::vector<int> LabelUtcl(int num_frames, int c);

// Stream order for sTCL: utterances shuffled by seed. The label of stream
// frame f is (f / chunk_frames) % c, so chunk labels do not reset at
// utterance boundaries.
std::vector<uint32_t> StclStreamOrder(size_t num_utterances, uint64_t shuffle_seed);
int StclLabel(size_t stream_frame, int chunk_frames, int c);

struct ApcPairs {
  Matrix inputs;   // frames 0..T-t_n-1
  Matrix targets;  // frames t_n..T-1
};

// Empty matrices when T <= t_n (utterance skipped upstream with a warning).
ApcPairs MakeApcPairs(const Matrix& frames, int t_n);

}  // namespace svbn

#endif  // SVBN_CORE_TARGETS_H_
