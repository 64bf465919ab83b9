// core/features.h

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

#ifndef SVBN_CORE_FEATURES_H_
#define SVBN_CORE_FEATURES_H_

#include <string>
#include <vector>

#include "core/common.h"

namespace svbn {

enum class FeatureKind : uint8_t { kMfcc = 0, kSpliced = 1, kBottleneck = 2, kIvectorStat = 3 };

/// Per-utterance frame matrix, one frame per row.
struct FeatureSequence {
  Matrix frames;               // T x D
  double frame_shift_ms = 10.0;
  FeatureKind kind = FeatureKind::kMfcc;
  std::string utterance_id;

  int NumFrames() const { return static_cast<int>(frames.rows()); }
  int Dim() const { return static_cast<int>(frames.cols()); }
};

// Utterance-level mean/variance normalization, in place. Population variance;
// T == 1 normalizes the mean only; a zero-variance dimension is left unscaled.
void CmvnUtterance(FeatureSequence* seq);

// Keeps the rows selected by the mask (mask.size() == T).
FeatureSequence SelectFrames(const FeatureSequence& seq, const std::vector<bool>& mask);

// "BNF1" feature file: u32 T, u32 D, then T*D float32, row-major, little-endian.
void WriteFeatures(const std::string& path, const FeatureSequence& seq);
FeatureSequence ReadFeatures(const std::string& path, const std::string& utterance_id = "");

}  // namespace svbn

#endif  // SVBN_CORE_FEATURES_H_
