// tests/test_frontend.cc

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

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "core/features.h"
#include "core/mfcc.h"
#include "core/vad.h"
#include "core/wav.h"
#include "doctest.h"

using namespace svbn;

namespace {
AudioClip MakeClip(size_t n, uint32_t rate, double value = 0.0) {
  AudioClip clip;
  clip.samples.assign(n, value);
  clip.sample_rate_hz = rate;
  clip.utterance_id = "test";
  return clip;
}

AudioClip Sine(size_t n, uint32_t rate, double freq_hz, double amplitude = 0.5) {
  AudioClip clip = MakeClip(n, rate);
  for (size_t i = 0; i < n; ++i)
    clip.samples[i] = amplitude * std::sin(2.0 * M_PI * freq_hz * i / rate);
  return clip;
}
}  // namespace

TEST_CASE("frame count follows the hop arithmetic") {
  // Oracle: frames = floor(samples / shift); frame t starts at t*shift.
  auto oracle = [](size_t n, int shift) { return static_cast<int>(n / shift); };
  CHECK(NumFrames(400, 400, 160) == oracle(400, 160));  // 2 frames at 16 kHz 25/10 ms
  CHECK(NumFrames(400, 400, 160) == 2);
  CHECK(NumFrames(399, 400, 160) == 0);  // shorter than one window
  CHECK(NumFrames(1600, 400, 160) == 10);

  const AudioClip clip = Sine(400, 16000, 440.0);
  const Matrix frames = FrameSignal(clip, 25.0, 10.0);
  CHECK(frames.rows() == 2);
  CHECK(frames.cols() == 400);
  // Frame 1 starts at sample 160: its first windowed value is
  // sample[160] * hamming[0] with hamming[0] = 0.08.
  CHECK(frames(1, 0) == doctest::Approx(clip.samples[160] * 0.08).epsilon(1e-12));
  // The zero-padded tail of frame 1 stays zero.
  CHECK(frames(1, 399) == 0.0);
}

TEST_CASE("clip of exactly one window length gives one frame") {
  const AudioClip clip = Sine(400, 16000, 300.0);
  const Matrix frames = FrameSignal(clip, 25.0, 25.0);
  CHECK(frames.rows() == 1);
}

TEST_CASE("constant-zero clip frames are all zero after windowing") {
  const Matrix frames = FrameSignal(MakeClip(800, 16000), 25.0, 10.0);
  CHECK(frames.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("clip shorter than one window is an empty-input error") {
  CHECK_THROWS_AS(FrameSignal(MakeClip(100, 16000), 25.0, 10.0), Error);
}

TEST_CASE("mfcc dimension is 3 * n_ceps") {
  MfccConfig config;
  MfccExtractor extractor(config, 16000);
  const FeatureSequence seq = extractor.Extract(Sine(8000, 16000, 500.0));
  CHECK(seq.Dim() == 57);
  CHECK(seq.NumFrames() == NumFrames(8000, 400, 160));
  CHECK(seq.frames.allFinite());
}

TEST_CASE("tone at a mel filter center concentrates energy in that filter") {
  MfccConfig config;
  MfccExtractor extractor(config, 16000);
  for (int filter : {5, 10, 20}) {
    const double center = MelFilterCenterHz(filter, config.n_mels, 16000);
    const Matrix logmel = extractor.LogMelEnergies(Sine(8000, 16000, center));
    // Middle frame, away from edge effects.
    Eigen::Index strongest = 0;
    logmel.row(logmel.rows() / 2).maxCoeff(&strongest);
    CHECK(strongest == filter);
  }
}

TEST_CASE("delta of a constant cepstral track is zero") {
  Matrix constant = Matrix::Constant(20, 19, 3.7);
  CHECK(DeltaRegression(constant).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("all-zero frames stay finite through the log floor") {
  MfccConfig config;
  MfccExtractor extractor(config, 16000);
  const FeatureSequence seq = extractor.Extract(MakeClip(1600, 16000));
  CHECK(seq.frames.allFinite());
}

TEST_CASE("vad keeps everything when energies are identical") {
  const Vector energies = Vector::Constant(7, 2.5);
  const std::vector<bool> mask = EnergyVad(energies, 0.4);
  for (bool kept : mask) CHECK(kept);
}

TEST_CASE("vad threshold splits a two-level utterance exactly") {
  // Oracle: threshold = lo + 0.5 (hi - lo) in log domain; high half kept.
  Vector energies(10);
  for (int i = 0; i < 10; ++i) energies(i) = i < 5 ? 8.0 : 8.0 / 1000.0;
  const std::vector<bool> mask = EnergyVad(energies, 0.5);
  for (int i = 0; i < 10; ++i) CHECK(mask[i] == (i < 5));
}

TEST_CASE("all-silent utterance yields an empty selection") {
  const std::vector<bool> mask = EnergyVad(Vector::Zero(5), 0.4);
  for (bool kept : mask) CHECK_FALSE(kept);
  FeatureSequence seq;
  seq.frames = Matrix::Random(5, 3);
  const FeatureSequence empty = SelectFrames(seq, mask);
  CHECK(empty.NumFrames() == 0);
}

TEST_CASE("vad mask is invariant to positive gain") {
  Rng rng(99);
  AudioClip clip = MakeClip(4800, 16000);
  for (auto& s : clip.samples) s = 0.2 * rng.Gaussian();
  for (size_t i = 0; i < 1200; ++i) clip.samples[i] = 0.0;  // leading digital silence
  for (double gain : {0.25, 1.0, 7.5}) {
    AudioClip scaled = clip;
    for (auto& s : scaled.samples) s *= gain;
    CHECK(EnergyVad(FrameEnergies(scaled, 25.0, 10.0), 0.4) ==
          EnergyVad(FrameEnergies(clip, 25.0, 10.0), 0.4));
  }
}

TEST_CASE("cmvn matches the closed-form oracle") {
  FeatureSequence seq;
  seq.frames.resize(2, 2);
  seq.frames << 1, 2, 3, 4;
  CmvnUtterance(&seq);
  CHECK(seq.frames(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(seq.frames(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(seq.frames(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(seq.frames(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cmvn is idempotent") {
  Rng rng(4);
  FeatureSequence seq;
  seq.frames.resize(40, 6);
  for (Eigen::Index i = 0; i < seq.frames.size(); ++i)
    seq.frames.data()[i] = rng.Gaussian() * 3.0 + 1.0;
  CmvnUtterance(&seq);
  const Matrix once = seq.frames;
  CmvnUtterance(&seq);
  CHECK((seq.frames - once).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cmvn on one frame subtracts the mean only") {
  FeatureSequence seq;
  seq.frames.resize(1, 2);
  seq.frames << 5, 5;
  CmvnUtterance(&seq);
  CHECK(seq.frames(0, 0) == 0.0);
  CHECK(seq.frames(0, 1) == 0.0);
}

TEST_CASE("cmvn leaves a zero-variance dimension unscaled") {
  FeatureSequence seq;
  seq.frames.resize(3, 2);
  seq.frames << 1, 7, 2, 7, 3, 7;
  CmvnUtterance(&seq);
  CHECK(seq.frames.col(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(seq.frames.col(0).squaredNorm() / 3.0 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cmvn invariant holds on the full pipeline output") {
  MfccConfig config;
  MfccExtractor extractor(config, 16000);
  AudioClip clip = Sine(16000, 16000, 700.0);
  Rng rng(7);
  for (auto& s : clip.samples) s += 0.05 * rng.Gaussian();
  FeatureSequence seq = extractor.Extract(clip);
  const std::vector<bool> mask = EnergyVad(FrameEnergies(clip, 25.0, 10.0), 0.4);
  seq = SelectFrames(seq, mask);
  REQUIRE(seq.NumFrames() > 1);
  CmvnUtterance(&seq);
  for (int j = 0; j < seq.Dim(); ++j) {
    const double mean = seq.frames.col(j).mean();
    const double var = seq.frames.col(j).squaredNorm() / seq.NumFrames() - mean * mean;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("wav round-trips 16-bit mono audio") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "svbn_test_tone.wav").string();
  const AudioClip clip = Sine(1234, 16000, 440.0);
  WriteWav(path, clip);
  const AudioClip loaded = ReadWav(path);
  REQUIRE(loaded.samples.size() == clip.samples.size());
  CHECK(loaded.sample_rate_hz == 16000);
  double max_err = 0.0;
  for (size_t i = 0; i < clip.samples.size(); ++i)
    max_err = std::max(max_err, std::abs(loaded.samples[i] - clip.samples[i]));
  CHECK(max_err < 1.0 / 32000.0);
  std::filesystem::remove(path);
}

TEST_CASE("feature files round-trip through BNF1") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "svbn_test_feat.bnf").string();
  FeatureSequence seq;
  seq.frames = Matrix::Random(13, 7);
  // Stored as float32; quantize the expectation the same way.
  for (Eigen::Index i = 0; i < seq.frames.size(); ++i)
    seq.frames.data()[i] = static_cast<float>(seq.frames.data()[i]);
  WriteFeatures(path, seq);
  const FeatureSequence loaded = ReadFeatures(path);
  CHECK(loaded.NumFrames() == 13);
  CHECK(loaded.Dim() == 7);
  CHECK((loaded.frames - seq.frames).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}
