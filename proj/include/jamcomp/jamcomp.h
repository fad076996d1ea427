/* Copyright 2026 The jamcomp Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* C interface to the jamcomp library.
 *
 * Every function returns a jc_status. On failure the message of the last
 * error on the calling thread is available from jc_last_error(). Strings
 * returned through char** out-parameters are heap-allocated and must be
 * released with jc_free_string(). Options are passed as JSON documents;
 * NULL or "" means all defaults.
 */

#ifndef JAMCOMP_JAMCOMP_H_
#define JAMCOMP_JAMCOMP_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define JC_API __attribute__((visibility("default")))
#else
#define JC_API
#endif

typedef enum {
  JC_OK = 0,
  JC_ERR_INVALID_ARGUMENT = 1,
  JC_ERR_INVALID_SPEC = 2,
  JC_ERR_UNSUPPORTED_WAVEFORM = 3,
  JC_ERR_INVALID_CHANNEL = 4,
  JC_ERR_INVALID_LENGTH = 5,
  JC_ERR_INSUFFICIENT_SAMPLES = 6,
  JC_ERR_SHAPE = 7,
  JC_ERR_DIVERGED = 8,
  JC_ERR_EMPTY_SPACE = 9,
  JC_ERR_MISSING_STATS = 10,
  JC_ERR_LEAKAGE = 11,
  JC_ERR_IO = 12,
  JC_ERR_FORMAT = 13,
  JC_ERR_CHECKSUM = 14,
  JC_ERR_NO_ARTIFACTS = 15,
  JC_ERR_INTERNAL = 99
} jc_status;

typedef struct jc_model jc_model;    /* float autoencoder */
typedef struct jc_qmodel jc_qmodel;  /* int8 autoencoder */

JC_API const char* jc_version(void);
/* Tool and file-format versions as JSON. */
JC_API jc_status jc_format_versions(char** out_json);
JC_API const char* jc_last_error(void);
JC_API const char* jc_status_name(jc_status status);
JC_API void jc_free_string(char* s);
/* Caps worker threads; 0 restores the hardware default. */
JC_API jc_status jc_set_threads(int n);

/* One waveform through the channel, written as an IQ file.
 * options: {"class", "seed", "n_samples", "sample_rate_hz", "jsr_db",
 *           "attenuation_db", "scenario"} */
JC_API jc_status jc_synth_snapshot(const char* options_json, const char* out_path);
/* Labeled dataset directory; options as the "dataset" config section. */
JC_API jc_status jc_synth_dataset(const char* options_json, const char* out_dir);
/* Feature CSV from a dataset directory; domain: spectral|temporal|mixed|iq. */
JC_API jc_status jc_extract_features(const char* dataset_dir, const char* domain,
                                     const char* out_csv);

/* Architecture search on the train split of a feature CSV. Writes
 * search_report.csv and model.aem under out_dir; summary JSON in out_json.
 * options: {"test_scenarios", "search": {...}} */
JC_API jc_status jc_search(const char* features_csv, const char* options_json,
                           const char* out_dir, char** out_json);

/* options: {"arch": descriptor, "test_scenarios", "budget": {...}} */
JC_API jc_status jc_model_train(const char* features_csv, const char* options_json,
                                jc_model** out, char** history_json);
JC_API jc_status jc_model_load(const char* path, jc_model** out);
JC_API jc_status jc_model_save(const jc_model* model, const char* path);
JC_API void jc_model_free(jc_model* model);
JC_API jc_status jc_model_info(const jc_model* model, char** out_json);
/* Row-major rows x input_dim in, rows x input_dim out (normalized space). */
JC_API jc_status jc_model_reconstruct(const jc_model* model, const double* x, int rows, int cols,
                                      double* out);

/* Calibrates on the train split and reports on the test split.
 * options: {"test_scenarios", "quant": {...}} */
JC_API jc_status jc_quantize(const jc_model* model, const char* features_csv,
                             const char* options_json, jc_qmodel** out, char** report_json);
JC_API jc_status jc_qmodel_load(const char* path, jc_qmodel** out);
JC_API jc_status jc_qmodel_save(const jc_qmodel* model, const char* path);
JC_API void jc_qmodel_free(jc_qmodel* model);
/* Integer inference; overflow_count may be NULL. */
JC_API jc_status jc_qmodel_forward(const jc_qmodel* model, const double* x, int rows, int cols,
                                   double* out, long* overflow_count);

/* Three-way protocol (raw / float / int8) for detection and classification.
 * options: {"test_scenarios", "forest": {...}} */
JC_API jc_status jc_classify_protocol(const char* features_csv, const jc_model* model,
                                      const jc_qmodel* qmodel, const char* options_json,
                                      const char* out_dir, char** metrics_json);

/* options: {"power": {...}, "traffic": {...}, "raw_rate_mb_per_s",
 *           "stated_residual"}; table_text may be NULL. */
JC_API jc_status jc_energy_report(const char* options_json, char** report_json,
                                  char** table_text);

/* Markdown summary of the artifacts under dir; writes dir/report.md. */
JC_API jc_status jc_render_report(const char* dir, char** markdown);

/* Trains a factorized VAE on spectrograms of a synthetic dataset and writes
 * an interpolation strip (PGM) between two snapshots.
 * options: {"dataset": {...}, "factor_vae": {...}, "steps", "pair": [a, b],
 *           "model_out"} */
JC_API jc_status jc_interpolate(const char* options_json, const char* out_pgm,
                                char** summary_json);

/* Full pipeline from a config file; manifest JSON in manifest_json.
 * overrides: {"output_dir", "threads"} applied after the environment. */
JC_API jc_status jc_pipeline_run(const char* config_path, const char* overrides_json,
                                 char** manifest_json);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* JAMCOMP_JAMCOMP_H_ */
