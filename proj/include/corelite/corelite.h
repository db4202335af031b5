/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the corelite toolkit: lite-set selection by k-center
 * greedy, n-gram contamination scanning and benchmark score aggregation.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every call returns a corelite_status; on failure corelite_last_error()
 * describes the problem (thread-local, valid until the next call on the same
 * thread). Strings returned through char** are NUL-terminated, allocated by
 * the library and released with corelite_string_free.
 */
#ifndef CORELITE_H
#define CORELITE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CORELITE_BUILDING)
#    define CORELITE_API __declspec(dllexport)
#  else
#    define CORELITE_API __declspec(dllimport)
#  endif
#else
#  define CORELITE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum corelite_status {
  CORELITE_OK = 0,
  CORELITE_ERR_INVALID_ARGUMENT = 1, /* value outside the operation's domain */
  CORELITE_ERR_IO = 2,               /* open/read/write failure */
  CORELITE_ERR_FORMAT = 3,           /* malformed file contents */
  CORELITE_ERR_DATA = 4,             /* well-formed input violating an invariant */
  CORELITE_ERR_INTERNAL = 5
} corelite_status;

typedef enum corelite_key_mode { CORELITE_KEYS_EXACT = 0, CORELITE_KEYS_HASHED = 1 } corelite_key_mode;
typedef enum corelite_weighting { CORELITE_UNWEIGHTED = 0, CORELITE_INSTANCE_WEIGHTED = 1 } corelite_weighting;
typedef enum corelite_corr_method { CORELITE_PEARSON = 0, CORELITE_SPEARMAN = 1 } corelite_corr_method;
typedef enum corelite_category {
  CORELITE_CLEAN = 0,
  CORELITE_DUPLICATE_IMAGE = 1,
  CORELITE_SIMILAR_IMAGE = 2,
  CORELITE_SIMILAR_QUESTION = 3
} corelite_category;

typedef struct corelite_embeddings corelite_embeddings;
typedef struct corelite_selection corelite_selection;
typedef struct corelite_text_index corelite_text_index;
typedef struct corelite_image_index corelite_image_index;
typedef struct corelite_report corelite_report;
typedef struct corelite_scores corelite_scores;
typedef struct corelite_scales corelite_scales;

CORELITE_API const char* corelite_version(void);
CORELITE_API const char* corelite_last_error(void);
CORELITE_API void corelite_string_free(char* s);

/* Lowercase hex SHA-256 of a file's bytes into out[65]. */
CORELITE_API corelite_status corelite_file_sha256(const char* path, char out[65]);

/* ---- embeddings ------------------------------------------------------- */

CORELITE_API corelite_status corelite_embeddings_load(const char* data_path, const char* ids_path,
                                                      corelite_embeddings** out);
/* Copies n*d row-major floats; ids is an array of n NUL-terminated strings. */
CORELITE_API corelite_status corelite_embeddings_create(size_t n, size_t d, const float* data,
                                                        const char* const* ids,
                                                        corelite_embeddings** out);
CORELITE_API corelite_status corelite_embeddings_save(const corelite_embeddings* e,
                                                      const char* data_path, const char* ids_path);
CORELITE_API size_t corelite_embeddings_rows(const corelite_embeddings* e);
CORELITE_API size_t corelite_embeddings_cols(const corelite_embeddings* e);
/* Borrowed pointer, valid while e lives. */
CORELITE_API const char* corelite_embeddings_id(const corelite_embeddings* e, size_t row);
/* [image | text], each half scaled to unit norm first when normalize != 0. */
CORELITE_API corelite_status corelite_embeddings_concat(const corelite_embeddings* image,
                                                        const corelite_embeddings* text,
                                                        int normalize, corelite_embeddings** out);
CORELITE_API corelite_status corelite_embeddings_normalize(const corelite_embeddings* e,
                                                           corelite_embeddings** out);
CORELITE_API void corelite_embeddings_free(corelite_embeddings* e);

/* ---- coreset ---------------------------------------------------------- */

/* threads = 0 uses every hardware thread; results do not depend on it. */
CORELITE_API corelite_status corelite_select(const corelite_embeddings* e, size_t k, uint64_t seed,
                                             unsigned threads, corelite_selection** out);
CORELITE_API corelite_status corelite_select_bruteforce(const corelite_embeddings* e, size_t k,
                                                        corelite_selection** out);
CORELITE_API size_t corelite_selection_size(const corelite_selection* s);
CORELITE_API size_t corelite_selection_index(const corelite_selection* s, size_t i);
CORELITE_API double corelite_selection_radius(const corelite_selection* s);
CORELITE_API corelite_status corelite_selection_to_json(const corelite_selection* s,
                                                        const corelite_embeddings* e, char** json);
CORELITE_API void corelite_selection_free(corelite_selection* s);

CORELITE_API corelite_status corelite_coverage_radius(const corelite_embeddings* e,
                                                      const size_t* centers, size_t count,
                                                      double* radius);
CORELITE_API corelite_status corelite_subset_gap(const double* scores, size_t n,
                                                 const size_t* subset, size_t m,
                                                 double* full_mean, double* subset_mean,
                                                 double* gap);
/* Published lite size for a dataset name; CORELITE_ERR_INVALID_ARGUMENT if unknown. */
CORELITE_API corelite_status corelite_default_lite_size(const char* dataset, size_t* k);

/* ---- decontamination -------------------------------------------------- */

CORELITE_API corelite_status corelite_text_index_build(const char* train_path, size_t n,
                                                       uint32_t freq_threshold,
                                                       corelite_key_mode mode, unsigned threads,
                                                       corelite_text_index** out);
CORELITE_API corelite_status corelite_text_index_load(const char* path, corelite_text_index** out);
CORELITE_API corelite_status corelite_text_index_save(const corelite_text_index* index,
                                                      const char* path);
CORELITE_API size_t corelite_text_index_n(const corelite_text_index* index);
CORELITE_API uint32_t corelite_text_index_freq_threshold(const corelite_text_index* index);
CORELITE_API corelite_key_mode corelite_text_index_mode(const corelite_text_index* index);
CORELITE_API size_t corelite_text_index_size(const corelite_text_index* index);
// Number of distinct n-grams whose count exceeds the frequency threshold.
CORELITE_API size_t corelite_text_index_meaningless(const corelite_text_index* index);
CORELITE_API void corelite_text_index_free(corelite_text_index* index);

CORELITE_API corelite_status corelite_scan_text(const corelite_text_index* index,
                                                const char* bench_path, double ratio_threshold,
                                                unsigned threads, corelite_report** out);

CORELITE_API corelite_status corelite_image_index_build(const char* train_path,
                                                        corelite_image_index** out);
CORELITE_API corelite_status corelite_image_index_load(const char* path, corelite_image_index** out);
CORELITE_API corelite_status corelite_image_index_save(const corelite_image_index* index,
                                                       const char* path);
CORELITE_API size_t corelite_image_index_size(const corelite_image_index* index);
CORELITE_API void corelite_image_index_free(corelite_image_index* index);

CORELITE_API corelite_status corelite_scan_image(const corelite_image_index* index,
                                                 const char* bench_path, unsigned threads,
                                                 corelite_report** out);

CORELITE_API double corelite_report_text_pct(const corelite_report* r);
CORELITE_API double corelite_report_image_pct(const corelite_report* r);
CORELITE_API size_t corelite_report_size(const corelite_report* r);
CORELITE_API size_t corelite_report_category_count(const corelite_report* r, corelite_category c);
CORELITE_API corelite_status corelite_report_to_json(const corelite_report* r, char** json);
CORELITE_API void corelite_report_free(corelite_report* r);

/* ---- scoring ---------------------------------------------------------- */

CORELITE_API corelite_status corelite_scores_load(const char* path, corelite_scores** out);
CORELITE_API size_t corelite_scores_size(const corelite_scores* s);
CORELITE_API void corelite_scores_free(corelite_scores* s);

CORELITE_API corelite_status corelite_scales_load(const char* path, corelite_scales** out);
CORELITE_API void corelite_scales_free(corelite_scales* s);

CORELITE_API corelite_status corelite_normalize_score(double raw, double min, double max,
                                                      double* out);
/* scales may be NULL: datasets whose scores all lie in 0..100 default to
 * (0, 100); any other unscaled dataset is an error. */
CORELITE_API corelite_status corelite_aggregate(const corelite_scores* scores,
                                                const corelite_scales* scales,
                                                corelite_weighting weighting, char** json);
CORELITE_API corelite_status corelite_correlate(const corelite_scores* full,
                                                const corelite_scores* lite,
                                                corelite_corr_method method, char** json);
CORELITE_API corelite_status corelite_pearson(const double* x, const double* y, size_t n,
                                              double* r);
CORELITE_API corelite_status corelite_spearman(const double* x, const double* y, size_t n,
                                               double* r);
/* Subset gap per model for a per-instance table (dataset column = instance
 * id) and the chosen instance ids. */
CORELITE_API corelite_status corelite_gap(const corelite_scores* per_instance,
                                          const char* const* subset_ids, size_t m, char** json);

#ifdef __cplusplus
}
#endif

#endif /* CORELITE_H */
