/* svbn.h - public C API for the svbn speaker-verification toolkit.
 *
 * Copyright 2026  The svbn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * All functions return svbn_status; on failure svbn_last_error() holds a
 * human-readable message for the calling thread. Handles are opaque and
 * must be released with their matching _free function.
 */

#ifndef SVBN_H_
#define SVBN_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum svbn_status {
  SVBN_OK = 0,
  SVBN_ERR_INTERNAL = 1,
  SVBN_ERR_CONFIG = 2,     /* bad configuration value or combination */
  SVBN_ERR_DEPENDENCY = 3, /* missing artifact or stale provenance */
  SVBN_ERR_NUMERIC = 4,    /* numerical failure (non-finite, degenerate) */
  SVBN_ERR_IO = 5,
  SVBN_ERR_FORMAT = 6,     /* bad magic, truncation, parse errors */
  SVBN_ERR_ARG = 7
} svbn_status;

const char* svbn_version(void);
const char* svbn_last_error(void);

/* ------------------------------------------------------------------ */
/* Configuration: flat key-value store, keys are "section.key".        */

typedef struct svbn_config svbn_config;

svbn_status svbn_config_create(svbn_config** out);
svbn_status svbn_config_load(const char* path, svbn_config** out);
svbn_status svbn_config_set(svbn_config* config, const char* key, const char* value);
svbn_status svbn_config_get(const svbn_config* config, const char* key, char* buffer,
                            size_t buffer_size);
svbn_status svbn_config_save(const svbn_config* config, const char* path);
void svbn_config_free(svbn_config* config);

/* ------------------------------------------------------------------ */
/* Pipeline stages: synth, features, targets, train-dnn, extract-bn,   */
/* train-ubm, train-tv, train-plda, enroll, score, evaluate, fuse.     */
/* seed_override, when non-NULL, replaces every *.seed config key.     */

svbn_status svbn_run_stage(const svbn_config* config, const char* stage,
                           const char* stage_dir, int force,
                           const uint64_t* seed_override);

/* Finite-difference verification of all loss/activation combinations.
 * Writes one line per combination to report_path (stdout when NULL) and
 * stores the largest relative error seen. Fails with SVBN_ERR_NUMERIC
 * if any combination exceeds the tolerance. */
svbn_status svbn_grad_check(uint64_t seed, double epsilon, double tolerance,
                            const char* report_path, double* max_rel_error);

/* ------------------------------------------------------------------ */
/* Feature matrices ("BNF1" files: u32 frames, u32 dim, f32 data).     */

typedef struct svbn_features svbn_features;

svbn_status svbn_features_load(const char* path, svbn_features** out);
svbn_status svbn_features_create(const float* data, uint32_t frames, uint32_t dim,
                                 svbn_features** out);
svbn_status svbn_features_save(const svbn_features* features, const char* path);
uint32_t svbn_features_frames(const svbn_features* features);
uint32_t svbn_features_dim(const svbn_features* features);
/* Row-major copy; capacity is the element count of the buffer. */
svbn_status svbn_features_copy(const svbn_features* features, float* buffer,
                               size_t capacity);
void svbn_features_free(svbn_features* features);

/* Full frontend on a 16-bit mono PCM wav: MFCC + deltas, energy VAD,
 * utterance-level CMVN, using the [frontend] section of the config. */
svbn_status svbn_features_from_wav(const svbn_config* config, const char* wav_path,
                                   svbn_features** out);

/* ------------------------------------------------------------------ */
/* Diagonal-covariance GMMs ("BNG1" files).                            */

typedef struct svbn_gmm svbn_gmm;

svbn_status svbn_gmm_load(const char* path, svbn_gmm** out);
int32_t svbn_gmm_components(const svbn_gmm* gmm);
int32_t svbn_gmm_dim(const svbn_gmm* gmm);
/* Average per-frame log-likelihood of the features under the model. */
svbn_status svbn_gmm_average_loglike(const svbn_gmm* gmm, const svbn_features* features,
                                     double* out);
/* Average log-likelihood ratio of target vs background model. */
svbn_status svbn_gmm_llr(const svbn_gmm* target, const svbn_gmm* ubm,
                         const svbn_features* features, double* out);
void svbn_gmm_free(svbn_gmm* gmm);

/* ------------------------------------------------------------------ */
/* Detection metrics over raw score arrays.                            */

svbn_status svbn_eer(const double* genuine, size_t n_genuine, const double* impostor,
                     size_t n_impostor, double* eer, double* threshold);
svbn_status svbn_min_dcf(const double* genuine, size_t n_genuine, const double* impostor,
                         size_t n_impostor, double c_miss, double c_fa, double p_target,
                         double* min_dcf, double* threshold);

#ifdef __cplusplus
}
#endif

#endif /* SVBN_H_ */
