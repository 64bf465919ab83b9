// core/mfcc.h

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

#ifndef SVBN_CORE_MFCC_H_
#define SVBN_CORE_MFCC_H_

#include <string>

#include "core/common.h"
#include "core/features.h"
#include "core/wav.h"

namespace svbn {

struct MfccConfig {
  double window_ms = 25.0;
  double shift_ms = 10.0;
  int n_mels = 26;
  int n_ceps = 19;      // static coefficients; output dim is 3 * n_ceps
  int fft_size = 0;     // 0: next power of two >= window length
  double log_floor = 1e-10;
};

// Frame layout: frame t covers samples [t*shift, t*shift + window); the tail
// beyond the signal is zero-padded and the count is floor(N / shift), so the
// final partial hop is dropped. A clip shorter than one window is an error.
int NumFrames(size_t num_samples, int window_samples, int shift_samples);

// Windowed frames (Hamming), one per row.
Matrix FrameSignal(const AudioClip& clip, double window_ms, double shift_ms);

// Sum of squared raw samples per frame, same frame layout as FrameSignal.
Vector FrameEnergies(const AudioClip& clip, double window_ms, double shift_ms);

// Triangular filters on the HTK mel scale, spanning 0..Nyquist.
// Returns n_mels x (fft_size/2 + 1).
Matrix BuildMelFilterbank(int n_mels, int fft_size, double sample_rate_hz);
double MelFilterCenterHz(int filter_index, int n_mels, double sample_rate_hz);

class MfccExtractor {
 public:
  MfccExtractor(const MfccConfig& config, uint32_t sample_rate_hz);
  ~MfccExtractor();
  MfccExtractor(const MfccExtractor&) = delete;
  MfccExtractor& operator=(const MfccExtractor&) = delete;

  // Static cepstra with delta and delta-delta appended; D = 3 * n_ceps.
  FeatureSequence Extract(const AudioClip& clip) const;

  // Log mel filterbank energies per frame (pre-DCT), used by tests.
  Matrix LogMelEnergies(const AudioClip& clip) const;

  const MfccConfig& config() const { return config_; }
  int fft_size() const { return fft_size_; }

 private:
  Matrix PowerSpectrum(const Matrix& windowed_frames) const;

  MfccConfig config_;
  uint32_t sample_rate_hz_;
  int window_samples_;
  int shift_samples_;
  int fft_size_;
  Matrix mel_filters_;
  Matrix dct_;  // n_ceps x n_mels, orthonormal DCT-II rows
  void* fftw_plan_ = nullptr;
  double* fftw_in_ = nullptr;
  void* fftw_out_ = nullptr;
};

// Delta by +/-2-frame linear regression with edge replication; applied once
// for delta, twice for delta-delta.
Matrix DeltaRegression(const Matrix& cepstra);

}  // namespace svbn

#endif  // SVBN_CORE_MFCC_H_
