/* drdoo: distributionally robust and optimistic optimisation with smooth
 * phi-divergence penalties. C interface.
 *
 * Every function returns a drdoo_status. On failure a description is
 * available from drdoo_last_error() on the calling thread until the next
 * call. Strings returned through char** are owned by the caller and must be
 * released with drdoo_string_free(). Handles are opaque; a handle may be used
 * from several threads at once only for read-only calls. */
#ifndef DRDOO_H
#define DRDOO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DRDOO_API __declspec(dllexport)
#else
#define DRDOO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum drdoo_status {
  DRDOO_OK = 0,
  DRDOO_ERR_INVALID_ARGUMENT = 1,
  DRDOO_ERR_CONFIG = 2,
  DRDOO_ERR_SOLVER = 3,
  DRDOO_ERR_IO = 4,
  DRDOO_ERR_UNAVAILABLE = 5,
  DRDOO_ERR_INTERNAL = 6
} drdoo_status;

typedef struct drdoo_config drdoo_config;
typedef struct drdoo_sample drdoo_sample;

DRDOO_API const char* drdoo_version(void);
DRDOO_API const char* drdoo_last_error(void);
DRDOO_API const char* drdoo_status_name(drdoo_status status);
DRDOO_API void drdoo_string_free(char* s);

/* Configuration. The defaults reproduce the inventory study. */
DRDOO_API drdoo_status drdoo_config_default(drdoo_config** out);
DRDOO_API drdoo_status drdoo_config_parse(const char* ini_text, drdoo_config** out);
DRDOO_API drdoo_status drdoo_config_load(const char* path, drdoo_config** out);
/* Sets `section.key` to `value` and revalidates; the handle is unchanged on failure. */
DRDOO_API drdoo_status drdoo_config_set(drdoo_config* config, const char* key, const char* value);
DRDOO_API drdoo_status drdoo_config_hash(const drdoo_config* config, char** out_hex);
DRDOO_API drdoo_status drdoo_config_canonical(const drdoo_config* config, char** out_text);
DRDOO_API void drdoo_config_free(drdoo_config* config);

/* Samples. `values` holds n points of dimension dim, point-major. `weights`
 * may be NULL for a uniform sample. */
DRDOO_API drdoo_status drdoo_sample_create(const double* values, const double* weights, size_t n, size_t dim,
                                           drdoo_sample** out);
/* CSV (y_1..y_l[,weight]) or, for a .json path, {"points": ..., "weights": ...}. */
DRDOO_API drdoo_status drdoo_sample_load(const char* path, drdoo_sample** out);
/* n draws from the configured population. */
DRDOO_API drdoo_status drdoo_sample_draw(const drdoo_config* config, size_t n, uint64_t seed, drdoo_sample** out);
DRDOO_API size_t drdoo_sample_size(const drdoo_sample* sample);
DRDOO_API size_t drdoo_sample_dim(const drdoo_sample* sample);
DRDOO_API drdoo_status drdoo_sample_to_csv(const drdoo_sample* sample, char** out_csv);
DRDOO_API void drdoo_sample_free(drdoo_sample* sample);

/* SAA (delta = 0), DRO (delta > 0) or DOO (delta < 0) solve as JSON. */
DRDOO_API drdoo_status drdoo_solve_json(const drdoo_config* config, const drdoo_sample* sample, double delta,
                                        char** out_json);
/* Bias direction, sensitivity, sandwich covariance and, when the population
 * allows it, rho and the optimal delta, as JSON. */
DRDOO_API drdoo_status drdoo_analyze_json(const drdoo_config* config, const drdoo_sample* sample, char** out_json);
/* figure: fig1, fig2a, fig2b, fig2c, fig2d or all. jobs <= 0 uses every core.
 * Writes CSV files and a manifest into out_dir; the manifest is also returned
 * when out_manifest_json is not NULL. */
DRDOO_API drdoo_status drdoo_reproduce(const drdoo_config* config, const char* figure, const char* out_dir, int jobs,
                                       char** out_manifest_json);

/* Numeric helpers. */
DRDOO_API drdoo_status drdoo_divergence_chi2(const double* q, const double* p, size_t n, double* out_value);
/* Inner problem at fixed rewards: value, dual variable and attaining weights
 * (out_q may be NULL). */
DRDOO_API drdoo_status drdoo_inner_value(const double* rewards, const double* weights, size_t n, double delta,
                                         double* out_value, double* out_c, double* out_q);

#ifdef __cplusplus
}
#endif

#endif
