// core/features.cc

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

#include "core/features.h"

#include <cmath>
#include <fstream>

namespace svbn {

void CmvnUtterance(FeatureSequence* seq) {
  const int t = seq->NumFrames();
  const int d = seq->Dim();
  if (t < 1) Throw(Status::kArg, "CmvnUtterance: empty sequence");
  Eigen::RowVectorXd mean = seq->frames.colwise().mean();
  seq->frames.rowwise() -= mean;
  if (t == 1) return;
  for (int j = 0; j < d; ++j) {
    double var = seq->frames.col(j).squaredNorm() / t;
    if (var > 0.0) seq->frames.col(j) /= std::sqrt(var);
  }
}

FeatureSequence SelectFrames(const FeatureSequence& seq, const std::vector<bool>& mask) {
  if (static_cast<int>(mask.size()) != seq.NumFrames())
    Throw(Status::kArg, "SelectFrames: mask length != frame count");
  int kept = 0;
  for (bool b : mask) kept += b ? 1 : 0;
  FeatureSequence out;
  out.frame_shift_ms = seq.frame_shift_ms;
  out.kind = seq.kind;
  out.utterance_id = seq.utterance_id;
  out.frames.resize(kept, seq.Dim());
  int row = 0;
  for (int i = 0; i < seq.NumFrames(); ++i) {
    if (mask[i]) out.frames.row(row++) = seq.frames.row(i);
  }
  return out;
}

void WriteFeatures(const std::string& path, const FeatureSequence& seq) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Throw(Status::kIo, "cannot write features: " + path);
  io::WriteMagic(os, "BNF1");
  io::WriteU32(os, static_cast<uint32_t>(seq.NumFrames()));
  io::WriteU32(os, static_cast<uint32_t>(seq.Dim()));
  for (int i = 0; i < seq.NumFrames(); ++i)
    for (int j = 0; j < seq.Dim(); ++j)
      io::WriteF32(os, static_cast<float>(seq.frames(i, j)));
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

FeatureSequence ReadFeatures(const std::string& path, const std::string& utterance_id) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Throw(Status::kIo, "cannot open features: " + path);
  io::ExpectMagic(is, "BNF1", path);
  uint32_t t = io::ReadU32(is, path);
  uint32_t d = io::ReadU32(is, path);
  FeatureSequence seq;
  seq.utterance_id = utterance_id.empty() ? path : utterance_id;
  seq.frames.resize(t, d);
  for (uint32_t i = 0; i < t; ++i)
    for (uint32_t j = 0; j < d; ++j)
      seq.frames(i, j) = io::ReadF32(is, path);
  return seq;
}

}  // namespace svbn
