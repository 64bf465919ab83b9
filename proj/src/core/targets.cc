// core/targets.cc

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

#include "core/targets.h"

#include <algorithm>
#include <set>

namespace svbn {

TargetScheme ParseTargetScheme(const std::string& name) {
  if (name == "speaker") return TargetScheme::kSpeaker;
  if (name == "utcl") return TargetScheme::kUtcl;
  if (name == "stcl") return TargetScheme::kStcl;
  if (name == "apc") return TargetScheme::kApc;
  Throw(Status::kConfig, "unknown target scheme: " + name);
}

std::string TargetSchemeName(TargetScheme scheme) {
  switch (scheme) {
    case TargetScheme::kSpeaker: return "speaker";
    case TargetScheme::kUtcl: return "utcl";
    case TargetScheme::kStcl: return "stcl";
    case TargetScheme::kApc: return "apc";
  }
  return "unknown";
}

Matrix SpliceContext(const Matrix& frames, int context) {
  if (context < 1 || context % 2 == 0)
    Throw(Status::kConfig, "splice_context: context must be odd and >= 1");
  const int t = static_cast<int>(frames.rows());
  const int d = static_cast<int>(frames.cols());
  const int half = context / 2;
  Matrix spliced(t, context * d);
  for (int i = 0; i < t; ++i) {
    for (int k = -half; k <= half; ++k) {
      const int src = std::clamp(i + k, 0, t - 1);
      spliced.block(i, (k + half) * d, 1, d) = frames.row(src);
    }
  }
  return spliced;
}

std::map<std::string, int> LabelSpeakers(const CorpusManifest& manifest) {
  std::set<std::string> speakers;
  for (const auto& e : manifest.entries) speakers.insert(e.speaker_id);
  if (speakers.size() < 2)
    Throw(Status::kConfig, "label_speaker: need at least 2 speakers, got " +
                               std::to_string(speakers.size()));
  std::map<std::string, int> mapping;
  int index = 0;
  for (const auto& s : speakers) mapping[s] = index++;
  return mapping;
}

std::vector<int> LabelUtcl(int num_frames, int c) {
  if (c < 1) Throw(Status::kConfig, "label_utcl: c must be >= 1");
  if (num_frames < c) return {};
  std::vector<int> labels(num_frames);
  const int base = num_frames / c;
  const int remainder = num_frames % c;
  int frame = 0;
  for (int seg = 0; seg < c; ++seg) {
    const int len = base + (seg < remainder ? 1 : 0);
    for (int k = 0; k < len; ++k) labels[frame++] = seg;
  }
  return labels;
}

std::vector<uint32_t> StclStreamOrder(size_t num_utterances, uint64_t shuffle_seed) {
  Rng rng(shuffle_seed);
  return rng.Permutation(static_cast<uint32_t>(num_utterances));
}

int StclLabel(size_t stream_frame, int chunk_frames, int c) {
  if (chunk_frames < 1 || c < 1) Throw(Status::kConfig, "label_stcl: M and c must be >= 1");
  return static_cast<int>((stream_frame / static_cast<size_t>(chunk_frames)) %
                          static_cast<size_t>(c));
}

ApcPairs MakeApcPairs(const Matrix& frames, int t_n) {
  if (t_n < 1) Throw(Status::kConfig, "make_apc_pairs: t_n must be >= 1");
  ApcPairs pairs;
  const int t = static_cast<int>(frames.rows());
  if (t <= t_n) return pairs;
  const int n = t - t_n;
  pairs.inputs = frames.topRows(n);
  pairs.targets = frames.bottomRows(n);
  return pairs;
}

}  // namespace svbn
