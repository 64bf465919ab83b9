// core/mfcc.cc

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

#include "core/mfcc.h"

#include <fftw3.h>

#include <cmath>

namespace svbn {

namespace {

int WindowSamples(double window_ms, uint32_t rate) {
  return static_cast<int>(std::lrint(window_ms * rate / 1000.0));
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

void CheckFraming(const AudioClip& clip, double window_ms, double shift_ms,
                  int* window_samples, int* shift_samples) {
  if (clip.sample_rate_hz == 0) Throw(Status::kArg, "frame_signal: zero sample rate");
  if (!(window_ms >= shift_ms && shift_ms > 0.0))
    Throw(Status::kArg, "frame_signal: need window_ms >= shift_ms > 0");
  *window_samples = WindowSamples(window_ms, clip.sample_rate_hz);
  *shift_samples = WindowSamples(shift_ms, clip.sample_rate_hz);
  if (*window_samples < 1 || *shift_samples < 1)
    Throw(Status::kArg, "frame_signal: window shorter than one sample");
  if (clip.samples.size() < static_cast<size_t>(*window_samples))
    Throw(Status::kArg, "frame_signal: clip '" + clip.utterance_id +
                            "' shorter than one window");
}

}  // namespace

int NumFrames(size_t num_samples, int window_samples, int shift_samples) {
  if (num_samples < static_cast<size_t>(window_samples)) return 0;
  return static_cast<int>(num_samples / static_cast<size_t>(shift_samples));
}

Matrix FrameSignal(const AudioClip& clip, double window_ms, double shift_ms) {
  int window = 0, shift = 0;
  CheckFraming(clip, window_ms, shift_ms, &window, &shift);
  const int t = NumFrames(clip.samples.size(), window, shift);
  Vector hamming(window);
  if (window == 1) {
    hamming(0) = 1.0;
  } else {
    for (int n = 0; n < window; ++n)
      hamming(n) = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (window - 1));
  }
  Matrix frames = Matrix::Zero(t, window);
  const size_t n_total = clip.samples.size();
  for (int i = 0; i < t; ++i) {
    const size_t start = static_cast<size_t>(i) * shift;
    for (int n = 0; n < window; ++n) {
      size_t idx = start + n;
      if (idx < n_total) frames(i, n) = clip.samples[idx] * hamming(n);
    }
  }
  return frames;
}

Vector FrameEnergies(const AudioClip& clip, double window_ms, double shift_ms) {
  int window = 0, shift = 0;
  CheckFraming(clip, window_ms, shift_ms, &window, &shift);
  const int t = NumFrames(clip.samples.size(), window, shift);
  Vector energies = Vector::Zero(t);
  const size_t n_total = clip.samples.size();
  for (int i = 0; i < t; ++i) {
    const size_t start = static_cast<size_t>(i) * shift;
    double sum = 0.0;
    for (int n = 0; n < window; ++n) {
      size_t idx = start + n;
      if (idx < n_total) sum += clip.samples[idx] * clip.samples[idx];
    }
    energies(i) = sum;
  }
  return energies;
}

Matrix BuildMelFilterbank(int n_mels, int fft_size, double sample_rate_hz) {
  const int n_bins = fft_size / 2 + 1;
  const double mel_lo = HzToMel(0.0);
  const double mel_hi = HzToMel(sample_rate_hz / 2.0);
  // n_mels + 2 boundary points, equally spaced on the mel scale.
  std::vector<double> hz(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    hz[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));
  Matrix filters = Matrix::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double left = hz[m], center = hz[m + 1], right = hz[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * sample_rate_hz / fft_size;
      if (f > left && f < center) {
        filters(m, k) = (f - left) / (center - left);
      } else if (f >= center && f < right) {
        filters(m, k) = (right - f) / (right - center);
      }
    }
  }
  return filters;
}

double MelFilterCenterHz(int filter_index, int n_mels, double sample_rate_hz) {
  const double mel_lo = HzToMel(0.0);
  const double mel_hi = HzToMel(sample_rate_hz / 2.0);
  return MelToHz(mel_lo + (mel_hi - mel_lo) * (filter_index + 1) / (n_mels + 1));
}

MfccExtractor::MfccExtractor(const MfccConfig& config, uint32_t sample_rate_hz)
    : config_(config), sample_rate_hz_(sample_rate_hz) {
  if (config.n_ceps > config.n_mels)
    Throw(Status::kConfig, "mfcc: n_ceps must be <= n_mels");
  window_samples_ = WindowSamples(config.window_ms, sample_rate_hz);
  shift_samples_ = WindowSamples(config.shift_ms, sample_rate_hz);
  fft_size_ = config.fft_size;
  if (fft_size_ == 0) {
    fft_size_ = 1;
    while (fft_size_ < window_samples_) fft_size_ *= 2;
  }
  if (fft_size_ < window_samples_)
    Throw(Status::kConfig, "mfcc: fft_size smaller than window");
  mel_filters_ = BuildMelFilterbank(config.n_mels, fft_size_, sample_rate_hz);

  dct_.resize(config.n_ceps, config.n_mels);
  const int nm = config.n_mels;
  for (int k = 0; k < config.n_ceps; ++k) {
    const double scale = (k == 0) ? std::sqrt(1.0 / nm) : std::sqrt(2.0 / nm);
    for (int n = 0; n < nm; ++n)
      dct_(k, n) = scale * std::cos(M_PI * (n + 0.5) * k / nm);
  }

  fftw_in_ = fftw_alloc_real(fft_size_);
  fftw_out_ = fftw_alloc_complex(fft_size_ / 2 + 1);
  // FFTW_ESTIMATE keeps plan selection deterministic across runs.
  fftw_plan_ = fftw_plan_dft_r2c_1d(fft_size_, fftw_in_,
                                    static_cast<fftw_complex*>(fftw_out_), FFTW_ESTIMATE);
}

MfccExtractor::~MfccExtractor() {
  if (fftw_plan_) fftw_destroy_plan(static_cast<fftw_plan>(fftw_plan_));
  if (fftw_in_) fftw_free(fftw_in_);
  if (fftw_out_) fftw_free(static_cast<fftw_complex*>(fftw_out_));
}

Matrix MfccExtractor::PowerSpectrum(const Matrix& windowed_frames) const {
  const int t = static_cast<int>(windowed_frames.rows());
  const int n_bins = fft_size_ / 2 + 1;
  Matrix power(t, n_bins);
  fftw_complex* out = static_cast<fftw_complex*>(fftw_out_);
  for (int i = 0; i < t; ++i) {
    for (int n = 0; n < fft_size_; ++n)
      fftw_in_[n] = n < windowed_frames.cols() ? windowed_frames(i, n) : 0.0;
    fftw_execute(static_cast<fftw_plan>(fftw_plan_));
    for (int k = 0; k < n_bins; ++k)
      power(i, k) = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }
  return power;
}

Matrix MfccExtractor::LogMelEnergies(const AudioClip& clip) const {
  Matrix frames = FrameSignal(clip, config_.window_ms, config_.shift_ms);
  Matrix power = PowerSpectrum(frames);
  Matrix mel = power * mel_filters_.transpose();
  for (int i = 0; i < mel.rows(); ++i)
    for (int j = 0; j < mel.cols(); ++j)
      mel(i, j) = std::log(std::max(mel(i, j), config_.log_floor));
  return mel;
}

Matrix DeltaRegression(const Matrix& cepstra) {
  const int t = static_cast<int>(cepstra.rows());
  Matrix delta(t, cepstra.cols());
  auto clamp_row = [&](int i) { return std::clamp(i, 0, t - 1); };
  for (int i = 0; i < t; ++i) {
    delta.row(i) = (1.0 * (cepstra.row(clamp_row(i + 1)) - cepstra.row(clamp_row(i - 1))) +
                    2.0 * (cepstra.row(clamp_row(i + 2)) - cepstra.row(clamp_row(i - 2)))) /
                   10.0;
  }
  return delta;
}

FeatureSequence MfccExtractor::Extract(const AudioClip& clip) const {
  Matrix logmel = LogMelEnergies(clip);
  Matrix statics = logmel * dct_.transpose();  // T x n_ceps
  Matrix d1 = DeltaRegression(statics);
  Matrix d2 = DeltaRegression(d1);
  FeatureSequence seq;
  seq.kind = FeatureKind::kMfcc;
  seq.frame_shift_ms = config_.shift_ms;
  seq.utterance_id = clip.utterance_id;
  seq.frames.resize(statics.rows(), 3 * config_.n_ceps);
  seq.frames << statics, d1, d2;
  RequireFinite(seq.frames, "mfcc(" + clip.utterance_id + ")");
  return seq;
}

}  // namespace svbn
