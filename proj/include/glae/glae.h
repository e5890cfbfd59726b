/* Copyright 2026 The glae authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Public C API of libglae: age estimation with label-distribution learning,
 * feature rearrangement, pixel-level auxiliary training, two-stage balanced
 * retraining and adaptive routing, plus the long-tailed evaluation suite.
 *
 * All entry points are opaque-handle based and return a glae_status; on
 * failure glae_last_error() carries a human-readable message for the calling
 * thread. Handles are not thread-safe unless noted; distinct handles may be
 * used from distinct threads freely.
 */

#ifndef GLAE_H
#define GLAE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum glae_status {
  GLAE_OK = 0,
  GLAE_ERR_INVALID_ARGUMENT = 1,
  GLAE_ERR_CONFIG = 2,
  GLAE_ERR_IO = 3,
  GLAE_ERR_FORMAT = 4,
  GLAE_ERR_STATE = 5,
  GLAE_ERR_INTERNAL = 6,
} glae_status;

const char* glae_version(void);

/* Stable lowercase name of a status code (e.g. "config"). */
const char* glae_status_name(glae_status status);

/* Message of the last failing call on this thread; empty string if none. */
const char* glae_last_error(void);

/* ------------------------------------------------------------------ */
/* Run configuration: flat `key = value` pairs. Unknown keys error out. */

typedef struct glae_config glae_config;

glae_status glae_config_create(glae_config** out);
glae_status glae_config_load(glae_config** out, const char* path);
glae_status glae_config_set(glae_config* cfg, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated, truncated to bufsize). */
glae_status glae_config_get(const glae_config* cfg, const char* key, char* buf,
                            size_t bufsize);
glae_status glae_config_save(const glae_config* cfg, const char* path);
void glae_config_destroy(glae_config* cfg);

/* ------------------------------------------------------------------ */
/* Commands. Paths are UTF-8. Each command writes its resolved config   */
/* next to its outputs.                                                 */

/* Deterministic synthetic long-tailed benchmark:
 * images/<id>.pgm + labels.csv + config.snapshot under out_dir. */
glae_status glae_generate_dataset(const glae_config* cfg, const char* out_dir);

/* stage 1 trains backbone + vanilla head (stage1_checkpoint must be NULL);
 * stage 2 freezes the backbone and trains the balanced head on top of the
 * given stage-1 checkpoint. */
glae_status glae_train(const glae_config* cfg, int stage, const char* dataset_dir,
                       const char* stage1_checkpoint, const char* out_checkpoint);

/* Test-split evaluation. Stage-2 checkpoints emit four prediction variants
 * (vanilla, balanced, smaller-upsilon routing, bigger-upsilon anti-routing),
 * per-variant metric reports, the routing table and per-group usage ratios;
 * stage-1 checkpoints emit the vanilla variant only. */
glae_status glae_evaluate(const glae_config* cfg, const char* checkpoint,
                          const char* dataset_dir, const char* out_dir);

/* Pure scoring of a predictions CSV (header id,true_age,pred_age[,sigma])
 * against the configured protocol; writes report.json / report.txt. */
glae_status glae_score(const glae_config* cfg, const char* predictions_csv,
                       const char* out_dir);

/* Figures (deterministic SVG). */
glae_status glae_plot_report(const char* report_json, const char* out_svg);
glae_status glae_plot_routing(const char* routing_usage_json, const char* out_svg);

/* ------------------------------------------------------------------ */
/* Model introspection                                                  */

typedef struct glae_model glae_model;

glae_status glae_model_open(glae_model** out, const char* checkpoint_path);
void glae_model_close(glae_model* model);

int glae_model_stage(const glae_model* model);
uint64_t glae_model_seed(const glae_model* model);
int glae_model_has_balanced_head(const glae_model* model);
/* Number of age categories (K + 1). */
int glae_model_categories(const glae_model* model);

/* Holistic category distribution for one image through one head.
 * image: c*h*w floats, NCHW, already normalized to the training range.
 * head: 0 = vanilla, 1 = balanced (requires a stage-2 checkpoint).
 * dist: caller-provided buffer of glae_model_categories() doubles. */
glae_status glae_model_predict(const glae_model* model, const float* image, int c, int h,
                               int w, int head, double* dist);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GLAE_H */
