#ifndef MGT_LAB_H
#define MGT_LAB_H

#include <stddef.h>

#if defined(_WIN32)
#define MGT_API __declspec(dllexport)
#else
#define MGT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mgt_status {
    MGT_OK = 0,
    MGT_ERR_NON_DISSIPATIVE,
    MGT_ERR_CONSERVATIVE_CASE,
    MGT_ERR_INVALID_DIMENSION,
    MGT_ERR_OUT_OF_RANGE,
    MGT_ERR_DOMAIN,
    MGT_ERR_OUT_OF_ZONE,
    MGT_ERR_STEP_FAILURE,
    MGT_ERR_UNSUPPORTED_DIMENSION,
    MGT_ERR_OVERFLOW,
    MGT_ERR_RADIUS_EXCEEDS_BOX,
    MGT_ERR_INSUFFICIENT_DATA,
    MGT_ERR_NON_POSITIVE_VALUES,
    MGT_ERR_ZERO_MASS,
    MGT_ERR_PARAMETER_WINDOW,
    MGT_ERR_DIMENSION_TOO_LOW,
    MGT_ERR_INADMISSIBLE_TRIPLE,
    MGT_ERR_CONFIG,
    MGT_ERR_IO,
    MGT_ERR_INVALID_ARGUMENT,
    MGT_ERR_INTERNAL
} mgt_status;

typedef struct mgt_complex {
    double re;
    double im;
} mgt_complex;

typedef struct mgt_params mgt_params;
typedef struct mgt_grid mgt_grid;
typedef struct mgt_field mgt_field;
typedef struct mgt_config mgt_config;

/* Samples initial data at x (unused coordinates are zero). */
typedef double (*mgt_sampler)(const double x[3], void* user);

enum { MGT_NORM_L2 = 0, MGT_NORM_HS_DOT = 1, MGT_NORM_LINF = 2, MGT_NORM_MASS = 3 };

MGT_API const char* mgt_status_string(mgt_status s);
/* Message of the last failing call on this thread; empty when none. */
MGT_API const char* mgt_last_error(void);
MGT_API void mgt_set_max_threads(int n);

MGT_API mgt_status mgt_params_create(double tau, double beta, mgt_params** out);
MGT_API void mgt_params_destroy(mgt_params* p);
MGT_API mgt_status mgt_params_get(const mgt_params* p, double* tau, double* beta);

MGT_API mgt_status mgt_rate_D(int n, double t, double* out);
MGT_API mgt_status mgt_rate_F(double m, int n, double s, double t, double* out);
MGT_API mgt_status mgt_rate_g_tilde(int n, double s, double t, double* out);
MGT_API mgt_status mgt_rate_h(double s, double t, double* out);
MGT_API mgt_status mgt_global_existence_admissible(int n, double s, double p, int* ok);
MGT_API mgt_status mgt_blowup_admissible(int n, double p, int* ok);

MGT_API mgt_status mgt_char_roots(const mgt_params* p, double r, mgt_complex roots[3], double* min_gap,
                                  int* degenerate);
/* K[3*m + d]: d-th time derivative of the kernel for data slot m. */
MGT_API mgt_status mgt_kernel_values(const mgt_params* p, double t, double r, double K[9]);
/* states receives 3 values per requested time. */
MGT_API mgt_status mgt_integrate_mode(const mgt_params* p, double r, const double init[3], double tol,
                                      size_t n_times, const double* times, double* states, double* est_error);

MGT_API mgt_status mgt_grid_create(int n, double L, int N, mgt_grid** out);
MGT_API void mgt_grid_destroy(mgt_grid* g);
MGT_API size_t mgt_grid_size(const mgt_grid* g);

/* Any sampler may be NULL for zero data. */
MGT_API mgt_status mgt_field_create(const mgt_grid* g, mgt_sampler u0, mgt_sampler u1, mgt_sampler u2, void* user,
                                    mgt_field** out);
MGT_API void mgt_field_destroy(mgt_field* f);
MGT_API double mgt_field_time(const mgt_field* f);
/* values receives mgt_grid_size() doubles in row-major order. */
MGT_API mgt_status mgt_field_values(const mgt_field* f, double* values);
MGT_API mgt_status mgt_field_norm(const mgt_field* f, int kind, double s, double* out);
MGT_API mgt_status mgt_field_linear_evolve(const mgt_field* f, const mgt_params* p, double t, mgt_field** out);
/* blowup is set to 1 with bracket filled when the run stops early. */
MGT_API mgt_status mgt_field_evolve_until(const mgt_field* f, const mgt_params* p, double power, double T,
                                          int* blowup, double bracket[2], mgt_field** out);
MGT_API mgt_status mgt_field_write_binary(const mgt_field* f, const char* path);

MGT_API mgt_status mgt_config_create(mgt_config** out);
MGT_API void mgt_config_destroy(mgt_config* c);
MGT_API mgt_status mgt_config_load_file(mgt_config* c, const char* path);
MGT_API mgt_status mgt_config_load_text(mgt_config* c, const char* text);
MGT_API mgt_status mgt_config_set(mgt_config* c, const char* key, const char* value);
MGT_API mgt_status mgt_config_set_preset(mgt_config* c, const char* preset);
/* Validates and writes the normalized config; *needed includes the terminating zero. */
MGT_API mgt_status mgt_config_serialize(const mgt_config* c, char* buf, size_t cap, size_t* needed);
/* Runs the configured experiment and writes its artifacts; exit_code is 0 on pass, 2 on a quantitative fail. */
MGT_API mgt_status mgt_run(const mgt_config* c, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif
