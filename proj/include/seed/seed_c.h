/* Licensed under the Apache License, Version 2.0.
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef SEED_C_H
#define SEED_C_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(SEED_BUILDING_LIBRARY)
#define SEED_API __declspec(dllexport)
#else
#define SEED_API __declspec(dllimport)
#endif
#else
#define SEED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum seed_status {
  SEED_OK = 0,
  SEED_ERR_INVALID_ARGUMENT = 1,
  SEED_ERR_IO = 2,
  SEED_ERR_MALFORMED_IR = 3,
  SEED_ERR_UNSUPPORTED_INSTRUCTION = 4,
  SEED_ERR_EMPTY_GRAPH = 5,
  SEED_ERR_EMPTY_CORPUS = 6,
  SEED_ERR_INSUFFICIENT_PAIRS = 7,
  SEED_ERR_OVERLAPPING_SPLIT = 8,
  SEED_ERR_DEGENERATE_DATA = 9,
  SEED_ERR_CHECKPOINT = 10,
  SEED_ERR_INTERNAL = 100
} seed_status;

/* Opaque handles. */
typedef struct seed_config seed_config;
typedef struct seed_model seed_model;

SEED_API const char *seed_version(void);
SEED_API const char *seed_status_name(seed_status status);

/* Message of the last failing call on this thread; empty after success. */
SEED_API const char *seed_last_error(void);

/* Releases strings returned through `char **` out-parameters. */
SEED_API void seed_string_free(char *s);

/* IR text -> canonical IR text (`format` "ir") or a JSON summary ("json"). */
SEED_API seed_status seed_parse(const char *ir_text, int strict, const char *format,
                                char **out);

/* IR text -> semantic graph, exported as "json" or "dot". `variant` is one
 * of "seed", "seed+type", "seed+identifier". */
SEED_API seed_status seed_graph(const char *ir_text, const char *variant, int strict,
                                const char *format, char **out);

/* Per-variant corpus statistics. `variant` may be NULL for all variants;
 * `format` is "json" or "table". */
SEED_API seed_status seed_stats(const char *corpus_dir, const char *variant, int strict,
                                const char *format, char **out);

SEED_API seed_status seed_config_new(seed_config **out);
SEED_API void seed_config_free(seed_config *config);
/* Applies `key=value` lines; unknown keys are an error. */
SEED_API seed_status seed_config_load(seed_config *config, const char *text);
SEED_API seed_status seed_config_set(seed_config *config, const char *key,
                                     const char *value);
SEED_API seed_status seed_config_text(const seed_config *config, char **out);

/* Trains on `corpus_dir` and writes the checkpoint (plus `<path>.vocab`).
 * `history` receives one JSON record per epoch and `report` the test-split
 * evaluation; either may be NULL. */
SEED_API seed_status seed_train(const char *corpus_dir, const seed_config *config,
                                const char *checkpoint_path, char **history,
                                char **report);

SEED_API seed_status seed_model_load(const char *checkpoint_path, seed_model **out);
SEED_API void seed_model_free(seed_model *model);
SEED_API seed_status seed_model_threshold(const seed_model *model, double *out);

/* Similarity and verdict for two IR texts. `json` (optional) receives
 * {"similarity":..,"verdict":"clone"|"nonclone"}. */
SEED_API seed_status seed_detect(const seed_model *model, const char *ir_a,
                                 const char *ir_b, double *similarity, int *is_clone,
                                 char **json);

/* Evaluates the named split ("train", "val", "test") with the stored
 * threshold; `report` receives the JSON report. */
SEED_API seed_status seed_evaluate(const seed_model *model, const char *corpus_dir,
                                   const char *split, char **report);

#ifdef __cplusplus
}
#endif

#endif /* SEED_C_H */
