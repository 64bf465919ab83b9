// capi/svbn_c.cc

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

#include "svbn.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include "core/config.h"
#include "core/features.h"
#include "core/gmm.h"
#include "core/eval.h"
#include "core/manifest.h"
#include "core/mfcc.h"
#include "core/model_io.h"
#include "core/pipeline.h"
#include "core/trainer.h"
#include "core/vad.h"
#include "core/wav.h"

struct svbn_config {
  svbn::Config config;
};

struct svbn_features {
  svbn::FeatureSequence seq;
};

struct svbn_gmm {
  svbn::DiagGmm gmm;
};

namespace {

thread_local std::string g_last_error;

svbn_status SetError(svbn::Status status, const std::string& message) {
  g_last_error = message;
  return static_cast<svbn_status>(status);
}

template <typename Body>
svbn_status Guarded(Body&& body) {
  try {
    body();
    return SVBN_OK;
  } catch (const svbn::Error& e) {
    return SetError(e.status(), e.what());
  } catch (const std::exception& e) {
    return SetError(svbn::Status::kInternal, e.what());
  }
}

svbn_status RequireArgs(bool ok, const char* message) {
  return ok ? SVBN_OK : SetError(svbn::Status::kArg, message);
}

}  // namespace

extern "C" {

const char* svbn_version(void) { return "1.0.0"; }

const char* svbn_last_error(void) { return g_last_error.c_str(); }

svbn_status svbn_config_create(svbn_config** out) {
  if (RequireArgs(out != nullptr, "null output") != SVBN_OK) return SVBN_ERR_ARG;
  return Guarded([&] { *out = new svbn_config{svbn::Config::Defaults()}; });
}

svbn_status svbn_config_load(const char* path, svbn_config** out) {
  if (RequireArgs(path && out, "null argument") != SVBN_OK) return SVBN_ERR_ARG;
  return Guarded([&] { *out = new svbn_config{svbn::Config::Load(path)}; });
}

svbn_status svbn_config_set(svbn_config* config, const char* key, const char* value) {
  if (RequireArgs(config && key && value, "null argument") != SVBN_OK) return SVBN_ERR_ARG;
  return Guarded([&] { config->config.Set(key, value); });
}

svbn_status svbn_config_get(const svbn_config* config, const char* key, char* buffer,
                            size_t buffer_size) {
  if (RequireArgs(config && key && buffer && buffer_size > 0, "null argument") != SVBN_OK)
    return SVBN_ERR_ARG;
  return Guarded([&] {
    const std::string value = config->config.GetString(key);
    if (value.size() + 1 > buffer_size)
      svbn::Throw(svbn::Status::kArg, "buffer too small for value of " + std::string(key));
    std::memcpy(buffer, value.c_str(), value.size() + 1);
  });
}

svbn_status svbn_config_save(const svbn_config* config, const char* path) {
  if (RequireArgs(config && path, "null argument") != SVBN_OK) return SVBN_ERR_ARG;
  return Guarded([&] { config->config.Save(path); });
}

void svbn_config_free(svbn_config* config) { delete config; }

svbn_status svbn_run_stage(const svbn_config* config, const char* stage,
                           const char* stage_dir, int force,
                           const uint64_t* seed_override) {
  if (RequireArgs(config && stage && stage_dir, "null argument") != SVBN_OK)
    return SVBN_ERR_ARG;
  return Guarded([&] {
    svbn::StageOptions options;
    options.stage_dir = stage_dir;
    options.force = force != 0;
    if (seed_override) options.seed_override = *seed_override;
    svbn::RunStage(config->config, stage, options);
  });
}

svbn_status svbn_grad_check(uint64_t seed, double epsilon, double tolerance,
                            const char* report_path, double* max_rel_error) {
  return Guarded([&] {
    const auto cases = svbn::RunGradCheckSuite(seed, epsilon, tolerance);
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (report_path) {
      file.open(report_path);
      if (!file) svbn::Throw(svbn::Status::kIo, "cannot write report");
      os = &file;
    }
    double worst = 0.0;
    bool all_passed = true;
    for (const auto& c : cases) {
      char line[160];
      std::snprintf(line, sizeof(line), "%-24s max_rel_error=%.3e  %s\n", c.name.c_str(),
                    c.max_rel_error, c.passed ? "ok" : "FAIL");
      *os << line;
      worst = std::max(worst, c.max_rel_error);
      all_passed = all_passed && c.passed;
    }
    if (max_rel_error) *max_rel_error = worst;
    if (!all_passed)
      svbn::Throw(svbn::Status::kNumeric, "gradient check failed; see report");
  });
}

svbn_status svbn_features_load(const char* path, svbn_features** out) {
  if (RequireArgs(path && out, "null argument") != SVBN_OK) return SVBN_ERR_ARG;
  return Guarded([&] { *out = new svbn_features{svbn::ReadFeatures(path)}; });
}

svbn_status svbn_features_create(const float* data, uint32_t frames, uint32_t dim,
                                 svbn_features** out) {
  if (RequireArgs(data && out && frames > 0 && dim > 0, "bad argument") != SVBN_OK)
    return SVBN_ERR_ARG;
  return Guarded([&] {
    svbn::FeatureSequence seq;
    seq.frames.resize(frames, dim);
    for (uint32_t i = 0; i < frames; ++i)
      for (uint32_t j = 0; j < dim; ++j) seq.frames(i, j) = data[i * dim + j];
    *out = new svbn_features{std::move(seq)};
  });
}

svbn_status svbn_features_save(const svbn_features* features, const char* path) {
  if (RequireArgs(features && path, "null argument") != SVBN_OK) return SVBN_ERR_ARG;
  return Guarded([&] { svbn::WriteFeatures(path, features->seq); });
}

uint32_t svbn_features_frames(const svbn_features* features) {
  return features ? static_cast<uint32_t>(features->seq.NumFrames()) : 0;
}

uint32_t svbn_features_dim(const svbn_features* features) {
  return features ? static_cast<uint32_t>(features->seq.Dim()) : 0;
}

svbn_status svbn_features_copy(const svbn_features* features, float* buffer,
                               size_t capacity) {
  if (RequireArgs(features && buffer, "null argument") != SVBN_OK) return SVBN_ERR_ARG;
  return Guarded([&] {
    const size_t needed = static_cast<size_t>(features->seq.NumFrames()) *
                          static_cast<size_t>(features->seq.Dim());
    if (capacity < needed) svbn::Throw(svbn::Status::kArg, "buffer too small");
    for (int i = 0; i < features->seq.NumFrames(); ++i)
      for (int j = 0; j < features->seq.Dim(); ++j)
        buffer[static_cast<size_t>(i) * features->seq.Dim() + j] =
            static_cast<float>(features->seq.frames(i, j));
  });
}

void svbn_features_free(svbn_features* features) { delete features; }

svbn_status svbn_features_from_wav(const svbn_config* config, const char* wav_path,
                                   svbn_features** out) {
  if (RequireArgs(config && wav_path && out, "null argument") != SVBN_OK)
    return SVBN_ERR_ARG;
  return Guarded([&] {
    const svbn::Config& c = config->config;
    const svbn::AudioClip clip = svbn::ReadWav(wav_path);
    svbn::MfccConfig mfcc_config;
    mfcc_config.window_ms = c.GetDouble("frontend.window_ms");
    mfcc_config.shift_ms = c.GetDouble("frontend.shift_ms");
    mfcc_config.n_mels = c.GetInt("frontend.n_mels");
    mfcc_config.n_ceps = c.GetInt("frontend.n_ceps");
    mfcc_config.fft_size = c.GetInt("frontend.fft_size");
    mfcc_config.log_floor = c.GetDouble("frontend.log_floor");
    svbn::MfccExtractor extractor(mfcc_config, clip.sample_rate_hz);
    svbn::FeatureSequence mfcc = extractor.Extract(clip);
    const svbn::Vector energies =
        svbn::FrameEnergies(clip, mfcc_config.window_ms, mfcc_config.shift_ms);
    const std::vector<bool> mask =
        svbn::EnergyVad(energies, c.GetDouble("frontend.vad_aggressiveness"));
    svbn::FeatureSequence voiced = svbn::SelectFrames(mfcc, mask);
    if (voiced.NumFrames() > 0) svbn::CmvnUtterance(&voiced);
    *out = new svbn_features{std::move(voiced)};
  });
}

svbn_status svbn_gmm_load(const char* path, svbn_gmm** out) {
  if (RequireArgs(path && out, "null argument") != SVBN_OK) return SVBN_ERR_ARG;
  return Guarded([&] { *out = new svbn_gmm{svbn::LoadGmm(path)}; });
}

int32_t svbn_gmm_components(const svbn_gmm* gmm) {
  return gmm ? gmm->gmm.NumComponents() : 0;
}

int32_t svbn_gmm_dim(const svbn_gmm* gmm) { return gmm ? gmm->gmm.Dim() : 0; }

svbn_status svbn_gmm_average_loglike(const svbn_gmm* gmm, const svbn_features* features,
                                     double* out) {
  if (RequireArgs(gmm && features && out, "null argument") != SVBN_OK) return SVBN_ERR_ARG;
  return Guarded([&] {
    if (features->seq.NumFrames() < 1)
      svbn::Throw(svbn::Status::kArg, "need at least one frame");
    *out = svbn::GmmTotalLogLikelihood(gmm->gmm, features->seq.frames) /
           features->seq.NumFrames();
  });
}

svbn_status svbn_gmm_llr(const svbn_gmm* target, const svbn_gmm* ubm,
                         const svbn_features* features, double* out) {
  if (RequireArgs(target && ubm && features && out, "null argument") != SVBN_OK)
    return SVBN_ERR_ARG;
  return Guarded(
      [&] { *out = svbn::LlrScore(target->gmm, ubm->gmm, features->seq.frames); });
}

void svbn_gmm_free(svbn_gmm* gmm) { delete gmm; }

svbn_status svbn_eer(const double* genuine, size_t n_genuine, const double* impostor,
                     size_t n_impostor, double* eer, double* threshold) {
  if (RequireArgs(genuine && impostor && eer, "null argument") != SVBN_OK)
    return SVBN_ERR_ARG;
  return Guarded([&] {
    const svbn::EerResult result =
        svbn::ComputeEer({genuine, genuine + n_genuine}, {impostor, impostor + n_impostor});
    *eer = result.eer;
    if (threshold) *threshold = result.threshold;
  });
}

svbn_status svbn_min_dcf(const double* genuine, size_t n_genuine, const double* impostor,
                         size_t n_impostor, double c_miss, double c_fa, double p_target,
                         double* min_dcf, double* threshold) {
  if (RequireArgs(genuine && impostor && min_dcf, "null argument") != SVBN_OK)
    return SVBN_ERR_ARG;
  return Guarded([&] {
    const svbn::MinDcfResult result =
        svbn::ComputeMinDcf({genuine, genuine + n_genuine},
                            {impostor, impostor + n_impostor}, c_miss, c_fa, p_target);
    *min_dcf = result.min_dcf;
    if (threshold) *threshold = result.threshold;
  });
}

}  // extern "C"
