#ifndef KFUKS_KFUKS_H
#define KFUKS_KFUKS_H

#include <stddef.h>
#include <stdint.h>

#if defined(KFUKS_BUILDING_LIBRARY)
#define KF_API __attribute__((visibility("default")))
#else
#define KF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kf_status {
  KF_OK = 0,
  KF_ERR_ARGUMENT = 1,
  KF_ERR_DOMAIN = 2,
  KF_ERR_UNSUPPORTED = 3,
  KF_ERR_TRUNCATION = 4,
  KF_ERR_INFEASIBLE = 5,
  KF_ERR_NUMERICAL = 6,
  KF_ERR_VALIDATION = 7,
  KF_ERR_ILL_CONDITIONED = 8,
  KF_ERR_STEP_TOO_LARGE = 9,
  KF_ERR_SCHEMA = 10,
  KF_ERR_IO = 11,
  KF_ERR_INTERNAL = 99
} kf_status;

typedef struct kf_domain kf_domain;
typedef struct kf_engine kf_engine;

/* Complex vectors are interleaved (re, im) pairs of length 2n. */

/* Message of the last failed call on this thread; never NULL. */
KF_API const char* kf_last_error(void);
KF_API const char* kf_version(void);
KF_API kf_status kf_set_threads(int threads);

KF_API kf_status kf_domain_from_json(const char* json, kf_domain** out);
KF_API void kf_domain_free(kf_domain* d);
KF_API int kf_domain_dim(const kf_domain* d);
KF_API kf_status kf_domain_contains(const kf_domain* d, const double* z, int* inside);
KF_API kf_status kf_boundary_distance(const kf_domain* d, const double* z, double* out);

/* options_json may be NULL (automatic engine choice). */
KF_API kf_status kf_engine_create(const kf_domain* d, const char* options_json, kf_engine** out);
KF_API void kf_engine_free(kf_engine* e);

KF_API kf_status kf_kernel(const kf_engine* e, const double* z, const double* w, double* re, double* im);
KF_API kf_status kf_kernel_diag(const kf_engine* e, const double* z, double* out);
/* Full invariant stack at z as a JSON string; release with kf_string_free. */
KF_API kf_status kf_metric_report_json(const kf_engine* e, const double* z, char** out);
KF_API kf_status kf_kobayashi_fuks_length(const kf_engine* e, const double* z, const double* u, double* out);

/* Extremal problems; need a Gram engine. */
KF_API kf_status kf_maximal_I(const kf_engine* e, const double* z, const double* u, double* out);
KF_API kf_status kf_maximal_M(const kf_engine* e, const double* z, const double* u, double* out);
KF_API kf_status kf_min_integrals(const kf_engine* e, const double* z, const double* u, double* I0, double* I1);

/* Runs a whole config and writes result.json and traces into out_dir.
   Returns the process exit code (0 ok, 1 fail, 2 schema, 3 numerical, 4 io). */
KF_API int kf_run(const char* config_json, const char* out_dir);
/* Runs a verify suite; result JSON in *out, pass flag in *pass. */
KF_API kf_status kf_verify(const char* suite, uint64_t seed, char** out, int* pass);

KF_API void kf_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
