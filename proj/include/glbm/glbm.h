/*
 * Copyright 2026 The glbm authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GLBM_GLBM_H
#define GLBM_GLBM_H

#include <stddef.h>

#if defined(GLBM_BUILDING_LIBRARY)
#define GLBM_API __attribute__((visibility("default")))
#else
#define GLBM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum glbm_status {
  GLBM_OK = 0,
  GLBM_ERR_ARGUMENT = 1,
  GLBM_ERR_RANGE = 2,
  GLBM_ERR_NUMERIC = 3,
  GLBM_ERR_IO = 4,
  GLBM_ERR_CONFIG = 5,
  GLBM_ERR_RUNTIME = 6
} glbm_status;

typedef struct glbm_config glbm_config;
typedef struct glbm_model glbm_model;

typedef struct glbm_sbm_report {
  double age;
  double peps;
  double pceps;
  double psnr;
  double msssim;
  double cqm;
} glbm_sbm_report;

typedef struct glbm_bs_score {
  double precision;
  double recall;
  double f_measure;
} glbm_bs_score;

/* Message of the last failed call on this thread; "" when none. */
GLBM_API const char* glbm_last_error(void);
GLBM_API const char* glbm_version(void);

/*
 * String outputs follow one convention: `needed` (if non-null) receives the
 * length including the terminating NUL; the text is copied when `cap` is large
 * enough, otherwise GLBM_ERR_RANGE is returned. A null `buf` with a non-null
 * `needed` is a size query and returns GLBM_OK.
 */

GLBM_API glbm_status glbm_config_create(glbm_config** out);
GLBM_API void glbm_config_destroy(glbm_config* config);
GLBM_API glbm_status glbm_config_set(glbm_config* config, const char* key, const char* value);
GLBM_API glbm_status glbm_config_get(const glbm_config* config, const char* key, char* buf, size_t cap,
                                     size_t* needed);
GLBM_API glbm_status glbm_config_load_file(glbm_config* config, const char* path);
GLBM_API glbm_status glbm_config_merge_text(glbm_config* config, const char* text);
GLBM_API glbm_status glbm_config_serialize(const glbm_config* config, char* buf, size_t cap, size_t* needed);
GLBM_API size_t glbm_config_key_count(void);
/* Key name, default and description of key `index`; NULL when out of range. */
GLBM_API const char* glbm_config_key_name(size_t index);
GLBM_API const char* glbm_config_key_default(size_t index);
GLBM_API const char* glbm_config_key_description(size_t index);
GLBM_API glbm_status glbm_describe_keys(char* buf, size_t cap, size_t* needed);

/* Synthetic dataset from the synth.* keys. */
GLBM_API glbm_status glbm_synth(const glbm_config* config, const char* out_dir, size_t* scene_count);
GLBM_API glbm_status glbm_make_masks(const glbm_config* config, const char* data_root, const char* out_dir);
/* Writes out_dir/ckpt, periodic checkpoints, train.log and config.cfg. */
GLBM_API glbm_status glbm_train(const glbm_config* config, const char* data_root, const char* out_dir,
                                double* final_loss);

GLBM_API glbm_status glbm_model_load(const char* checkpoint, glbm_model** out);
GLBM_API void glbm_model_free(glbm_model* model);
GLBM_API glbm_status glbm_model_info(const glbm_model* model, int* height, int* width, int* latent_dim, int* epoch);

/* mode: "median" or "per_frame". */
GLBM_API glbm_status glbm_estimate(glbm_model* model, const char* scene_dir, const char* mode, const char* out_dir,
                                   size_t* written);
/* Threshold and cleanup from eval.threshold and eval.postproc. */
GLBM_API glbm_status glbm_subtract(const glbm_config* config, const char* scene_dir, const char* background,
                                   const char* out_dir, size_t* written);
GLBM_API glbm_status glbm_eval_sbm(const glbm_config* config, const char* gt_image, const char* est_image,
                                   glbm_sbm_report* out);
GLBM_API glbm_status glbm_eval_bs(const char* pred_dir, const char* gt_dir, glbm_bs_score* out);

#ifdef __cplusplus
}
#endif

#endif
