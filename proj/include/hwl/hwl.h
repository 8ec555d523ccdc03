/* C interface to the hwl library. All functions return an hwl_status; on
 * failure hwl_last_error() describes the problem for the calling thread.
 * Strings returned through char** must be released with hwl_string_free. */
#ifndef HWL_H
#define HWL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HWL_API __declspec(dllexport)
#else
#define HWL_API __attribute__((visibility("default")))
#endif

typedef enum hwl_status {
  HWL_OK = 0,
  HWL_INVALID_ARGUMENT = 1,
  HWL_INVALID_INDEX = 2,
  HWL_MODEL_MISMATCH = 3,
  HWL_DOMAIN = 4,
  HWL_CAPACITY = 5,
  HWL_CONVERGENCE = 6,
  HWL_CONFIGURATION = 7,
  HWL_IO = 8,
  HWL_STENCIL = 9,
  HWL_INTERNAL = 100
} hwl_status;

typedef struct hwl_weight hwl_weight;

typedef struct hwl_run_summary {
  int skipped;
  int capacity_skipped;
  int certificates_failed;
  int wrote_file;
} hwl_run_summary;

HWL_API const char* hwl_version(void);
HWL_API const char* hwl_status_name(hwl_status s);
HWL_API const char* hwl_last_error(void);
HWL_API void hwl_string_free(char* s);

/* Weights on the dyadic model of the given depth; values holds 2^depth leaves. */
HWL_API hwl_status hwl_weight_create(int depth, const double* values, size_t count, hwl_weight** out);
HWL_API void hwl_weight_destroy(hwl_weight* w);
HWL_API hwl_status hwl_weight_average(const hwl_weight* w, int level, uint64_t pos, double* out);

HWL_API hwl_status hwl_joint_a2(const hwl_weight* v, const hwl_weight* w, double* out);
HWL_API hwl_status hwl_cond_12(const hwl_weight* v, const hwl_weight* w, double* out);
HWL_API hwl_status hwl_cond_13(const hwl_weight* v, const hwl_weight* w, double* out);
HWL_API hwl_status hwl_t0_norm(const hwl_weight* v, const hwl_weight* w, double* out);
/* mode: "exhaustive", "sampled" or "greedy". upper is NaN when not certified. */
HWL_API hwl_status hwl_sup_sign_norm(const hwl_weight* v, const hwl_weight* w, const char* mode,
                                     uint64_t samples, uint64_t seed, double* lower, double* upper);
HWL_API hwl_status hwl_sup_s_value(double x, double w, double y, double v, double k, double* s_star,
                                   double* value);

/* Runs a JSON scenario config. norms_only restricts the analyses to the norm
 * group. When the config names an output path the result goes there and
 * *out is NULL; otherwise *out holds the rendered bundle. */
HWL_API hwl_status hwl_run_scenario_json(const char* config, int norms_only, int timing, char** out,
                                         hwl_run_summary* summary);
/* alpha may be NaN for the certificate's default. */
HWL_API hwl_status hwl_certify_json(const char* cert_id, double alpha, uint64_t samples, uint64_t seed,
                                    char** out, int* passed);
HWL_API hwl_status hwl_search_json(const char* from, const char* to, uint64_t budget, uint64_t seed,
                                   int depth, char** out);
HWL_API hwl_status hwl_selftest_json(char** out, int* passed);
HWL_API hwl_status hwl_bundle_to_csv(const char* bundle_json, char** out);

#ifdef __cplusplus
}
#endif

#endif
