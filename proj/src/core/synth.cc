// core/synth.cc

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

#include "core/synth.h"

#include <cstdio>
#include <filesystem>
#include <vector>

#include "core/eval.h"
#include "core/features.h"
#include "core/manifest.h"

namespace svbn {

void SyntheticCorpusSpec::Validate() const {
  if (n_speakers < 2) Throw(Status::kConfig, "synth: need >= 2 speakers");
  if (n_phrases < 1 || sessions_per_phrase < 1 || frames_per_utterance < 1 || dim < 1 ||
      anchors_per_phrase < 1)
    Throw(Status::kConfig, "synth: all counts must be positive");
  if (speaker_scale < 0.0 || phrase_scale < 0.0 || noise_scale < 0.0)
    Throw(Status::kConfig, "synth: scales must be >= 0");
  if (sessions_per_phrase < 2)
    Throw(Status::kConfig, "synth: need >= 2 sessions (enroll + test)");
}

namespace {
std::string Id(const char* prefix, int i) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s%03d", prefix, i);
  return buffer;
}
}  // namespace

SynthOutput SynthCorpus(const SyntheticCorpusSpec& spec, const std::string& out_dir) {
  spec.Validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "features");

  Rng rng(spec.seed);
  const int d = spec.dim;

  // Latent speaker offsets, then per-phrase anchor sequences; draw order is
  // fixed so the corpus is reproducible byte for byte.
  std::vector<Vector> speakers(spec.n_speakers);
  for (auto& s : speakers) {
    s = Vector(d);
    for (int j = 0; j < d; ++j) s(j) = spec.speaker_scale * rng.Gaussian();
  }
  std::vector<std::vector<Vector>> anchors(spec.n_phrases);
  for (auto& phrase : anchors) {
    phrase.resize(spec.anchors_per_phrase);
    for (auto& a : phrase) {
      a = Vector(d);
      for (int j = 0; j < d; ++j) a(j) = spec.phrase_scale * rng.Gaussian();
    }
  }

  CorpusManifest train, enroll, test;
  SynthOutput out;
  const int t_len = spec.frames_per_utterance;
  for (int i = 0; i < spec.n_speakers; ++i) {
    for (int p = 0; p < spec.n_phrases; ++p) {
      for (int s = 0; s < spec.sessions_per_phrase; ++s) {
        const std::string utt_id =
            Id("spk", i) + "_" + Id("phr", p) + "_s" + std::to_string(s);
        FeatureSequence seq;
        seq.kind = FeatureKind::kMfcc;
        seq.utterance_id = utt_id;
        seq.frames.resize(t_len, d);
        for (int t = 0; t < t_len; ++t) {
          const int seg = t * spec.anchors_per_phrase / t_len;
          for (int j = 0; j < d; ++j)
            seq.frames(t, j) = speakers[i](j) + anchors[p][seg](j) +
                               spec.noise_scale * rng.Gaussian();
        }
        const std::string path =
            (fs::path(out_dir) / "features" / (utt_id + ".bnf")).string();
        WriteFeatures(path, seq);
        ManifestEntry entry{utt_id, Id("spk", i), Id("phr", p), path};
        if (s + 1 == spec.sessions_per_phrase) {
          test.entries.push_back(entry);
        } else {
          train.entries.push_back(entry);
          enroll.entries.push_back(entry);
        }
        ++out.utterances;
      }
    }
  }

  TrialSet trials;
  for (int i = 0; i < spec.n_speakers; ++i) {
    for (int p = 0; p < spec.n_phrases; ++p) {
      const std::string enroll_id = Id("spk", i) + ":" + Id("phr", p);
      for (const auto& t : test.entries) {
        const bool same_speaker = t.speaker_id == Id("spk", i);
        const bool same_phrase = t.phrase_id == Id("phr", p);
        TrialLabel label;
        if (same_speaker && same_phrase) label = TrialLabel::kGenuine;
        else if (same_speaker) label = TrialLabel::kTargetWrong;
        else if (same_phrase) label = TrialLabel::kImposterCorrect;
        else label = TrialLabel::kImposterWrong;
        trials.trials.push_back({enroll_id, t.utterance_id, label});
      }
    }
  }

  out.train_manifest = (fs::path(out_dir) / "train_manifest.tsv").string();
  out.enroll_manifest = (fs::path(out_dir) / "enroll_manifest.tsv").string();
  out.test_manifest = (fs::path(out_dir) / "test_manifest.tsv").string();
  out.trials = (fs::path(out_dir) / "trials.tsv").string();
  SaveManifest(out.train_manifest, train);
  SaveManifest(out.enroll_manifest, enroll);
  SaveManifest(out.test_manifest, test);
  SaveTrials(out.trials, trials);
  return out;
}

}  // namespace svbn
