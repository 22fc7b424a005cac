/* Copyright 2026 The Tempora Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

	http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
--------------------------------------------------------------------------------------------------------------*/

#ifndef TEMPORA_TEMPORA_H
#define TEMPORA_TEMPORA_H

#include <stddef.h>
#include <stdint.h>

#if defined(TEMPORA_BUILDING)
#define TEMPORA_API __attribute__((visibility("default")))
#else
#define TEMPORA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The nonzero values double as CLI exit codes. */
typedef enum {
    TEMPORA_OK = 0,
    TEMPORA_E_ARGUMENT = 1,
    TEMPORA_E_CONFIG = 2,
    TEMPORA_E_DATA = 3,
    TEMPORA_E_RUNTIME = 4
} tempora_status;

typedef struct tempora_panel tempora_panel;
typedef struct tempora_booster tempora_booster;

/* Message for the last failing call on this thread; empty after success. */
TEMPORA_API const char* tempora_last_error(void);

TEMPORA_API tempora_status tempora_panel_read(const char* path, tempora_panel** out);
/* Synthetic panel with default settings apart from the sizes and the seed. */
TEMPORA_API tempora_status tempora_panel_generate(int n_eras, int n_features, int stocks_per_era, uint64_t seed,
                                                  tempora_panel** out);
TEMPORA_API tempora_status tempora_panel_write(const tempora_panel* panel, const char* path);
TEMPORA_API size_t tempora_panel_era_count(const tempora_panel* panel);
TEMPORA_API size_t tempora_panel_feature_count(const tempora_panel* panel);
/* Rows in the era at position `era_pos` (0-based), or 0 when out of range. */
TEMPORA_API size_t tempora_panel_era_rows(const tempora_panel* panel, size_t era_pos);
TEMPORA_API void tempora_panel_free(tempora_panel* panel);

/* Trains on every era of `panel` whose target is resolved. `mode` is "gbdt", "dart" or "goss". */
TEMPORA_API tempora_status tempora_booster_train(const tempora_panel* panel, const char* target, const char* mode,
                                                 int n_estimators, double learning_rate, int num_leaves,
                                                 uint64_t seed, tempora_booster** out);
TEMPORA_API tempora_status tempora_booster_load(const char* path, tempora_booster** out);
TEMPORA_API tempora_status tempora_booster_save(const tempora_booster* booster, const char* path);
TEMPORA_API size_t tempora_booster_tree_count(const tempora_booster* booster);
/* Writes tempora_panel_era_rows(panel, era_pos) scores into `scores`. */
TEMPORA_API tempora_status tempora_booster_predict_era(const tempora_booster* booster, const tempora_panel* panel,
                                                       size_t era_pos, size_t prune_first, double* scores,
                                                       size_t capacity);
TEMPORA_API void tempora_booster_free(tempora_booster* booster);

/* Rank correlation of one era's scores against its target. */
TEMPORA_API tempora_status tempora_era_corr(const double* scores, const double* target, size_t n, double* out);

typedef struct {
    double mean;
    double volatility;
    double max_drawdown;
    double sharpe;
    double calmar;
} tempora_summary;

TEMPORA_API tempora_status tempora_summarize(const double* values, size_t n, tempora_summary* out);

/* y minus beta times its projection onto the column space of x (n rows, k columns, column-major). */
TEMPORA_API tempora_status tempora_project_linear(const double* y, const double* x, size_t n, size_t k, double beta,
                                                  double* out);

/* Runs a CLI subcommand. `out_dir` may be NULL; `seed` is used only when `has_seed` is nonzero.
   Returns the exit code; diagnostics go to stderr. */
TEMPORA_API int tempora_run(const char* subcommand, const char* config_path, const char* out_dir, int has_seed,
                            uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif
