/* Exercises the shared library through its C header only. */
#include "mgt_lab.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                        \
    do {                                                                    \
        if (!(cond)) {                                                      \
            fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                     \
        }                                                                   \
    } while (0)

static double gauss(const double x[3], void* user)
{
    double w = *(const double*)user;
    return exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (w * w));
}

static void test_params(void)
{
    mgt_params* p = NULL;
    double tau = 0, beta = 0;
    EXPECT(mgt_params_create(0.5, 1.0, &p) == MGT_OK);
    EXPECT(mgt_params_get(p, &tau, &beta) == MGT_OK);
    EXPECT(tau == 0.5 && beta == 1.0);
    mgt_params_destroy(p);

    p = NULL;
    EXPECT(mgt_params_create(1.0, 1.0, &p) == MGT_ERR_CONSERVATIVE_CASE);
    EXPECT(p == NULL);
    EXPECT(strlen(mgt_last_error()) > 0);
    EXPECT(mgt_params_create(2.0, 1.0, &p) == MGT_ERR_NON_DISSIPATIVE);
    EXPECT(mgt_params_create(0.5, 1.0, NULL) == MGT_ERR_INVALID_ARGUMENT);
    EXPECT(strcmp(mgt_status_string(MGT_OK), "Ok") == 0 || strlen(mgt_status_string(MGT_OK)) > 0);
    mgt_params_destroy(NULL);
}

static void test_rates(void)
{
    double v = 0;
    int ok = -1;
    EXPECT(mgt_rate_D(1, 100.0, &v) == MGT_OK);
    EXPECT(v == sqrt(100.0));
    EXPECT(mgt_rate_D(2, 1.0, &v) == MGT_ERR_DOMAIN);
    EXPECT(mgt_rate_D(0, 1.0, &v) == MGT_ERR_INVALID_DIMENSION);
    EXPECT(mgt_global_existence_admissible(3, 1, 3, &ok) == MGT_OK);
    EXPECT(ok == 1);
    EXPECT(mgt_global_existence_admissible(2, 1, 3, &ok) == MGT_OK);
    EXPECT(ok == 0);
    EXPECT(mgt_blowup_admissible(1, 2, &ok) == MGT_OK);
    EXPECT(ok == 1);
}

static void test_kernel(void)
{
    mgt_params* p = NULL;
    mgt_complex roots[3];
    double gap = 0, K[9], init[3] = {0, 0, 1}, times[3] = {0.5, 1.0, 2.0}, states[9], est = 0;
    int degenerate = -1, m, d, i;
    mgt_params_create(0.5, 1.0, &p);
    EXPECT(mgt_char_roots(p, 1.0, roots, &gap, &degenerate) == MGT_OK);
    EXPECT(degenerate == 0);
    for (i = 0; i < 3; ++i) EXPECT(roots[i].re < 0);
    EXPECT(mgt_kernel_values(p, 0.0, 1.0, K) == MGT_OK);
    for (m = 0; m < 3; ++m)
        for (d = 0; d < 3; ++d) EXPECT(K[3 * m + d] == (m == d ? 1.0 : 0.0));
    EXPECT(mgt_integrate_mode(p, 1.0, init, 1e-13, 3, times, states, &est) == MGT_OK);
    for (i = 0; i < 3; ++i) {
        EXPECT(mgt_kernel_values(p, times[i], 1.0, K) == MGT_OK);
        for (d = 0; d < 3; ++d) EXPECT(fabs(states[3 * i + d] - K[6 + d]) < 1e-10);
    }
    times[0] = 3.0;
    EXPECT(mgt_integrate_mode(p, 1.0, init, 1e-13, 3, times, states, &est) == MGT_ERR_INVALID_ARGUMENT);
    EXPECT(mgt_kernel_values(p, -1.0, 1.0, K) == MGT_ERR_INVALID_ARGUMENT);
    mgt_params_destroy(p);
}

static void test_fields(void)
{
    mgt_params* p = NULL;
    mgt_grid* g = NULL;
    mgt_field *f = NULL, *h = NULL, *b = NULL;
    double w = 1.0, v = 0, bracket[2] = {0, 0};
    double* vals;
    int blowup = -1;
    mgt_params_create(0.5, 1.0, &p);
    EXPECT(mgt_grid_create(1, 40.0, 256, &g) == MGT_OK);
    EXPECT(mgt_grid_size(g) == 256);
    EXPECT(mgt_grid_create(1, 40.0, 100, &g) != MGT_OK);
    EXPECT(mgt_field_create(g, gauss, NULL, NULL, &w, &f) == MGT_OK);
    EXPECT(mgt_field_norm(f, MGT_NORM_L2, 0, &v) == MGT_OK);
    EXPECT(fabs(v - pow(acos(-1.0) / 2, 0.25)) < 1e-8);
    EXPECT(mgt_field_norm(f, MGT_NORM_MASS, 0, &v) == MGT_OK);
    EXPECT(fabs(v - sqrt(acos(-1.0))) < 1e-8);
    EXPECT(mgt_field_norm(f, 42, 0, &v) == MGT_ERR_INVALID_ARGUMENT);
    EXPECT(mgt_field_norm(f, MGT_NORM_HS_DOT, 3.0, &v) == MGT_ERR_OUT_OF_RANGE);
    vals = malloc(sizeof(double) * mgt_grid_size(g));
    EXPECT(mgt_field_values(f, vals) == MGT_OK);
    EXPECT(fabs(vals[128] - 1.0) < 1e-12);
    free(vals);
    mgt_field_destroy(f);

    EXPECT(mgt_field_create(g, NULL, NULL, gauss, &w, &f) == MGT_OK);
    EXPECT(mgt_field_linear_evolve(f, p, 2.0, &h) == MGT_OK);
    EXPECT(mgt_field_time(h) == 2.0);
    EXPECT(mgt_field_evolve_until(f, p, 2.0, 100.0, &blowup, bracket, &b) == MGT_OK);
    EXPECT(blowup == 1);
    EXPECT(bracket[0] < bracket[1]);
    EXPECT(mgt_field_write_binary(h, "/nonexistent/dir/f.bin") == MGT_ERR_IO);
    mgt_field_destroy(b);
    mgt_field_destroy(h);
    mgt_field_destroy(f);
    mgt_grid_destroy(g);
    mgt_params_destroy(p);
}

static void test_config(void)
{
    mgt_config* c = NULL;
    size_t need = 0;
    char small[8];
    char* buf;
    int exit_code = -1;
    EXPECT(mgt_config_create(&c) == MGT_OK);
    EXPECT(mgt_config_load_text(c, "preset = roots\nsamples = 100\np = 3\n") == MGT_OK);
    EXPECT(mgt_config_set(c, "p", "2") == MGT_OK);
    EXPECT(mgt_config_set(c, "bogus", "1") == MGT_ERR_CONFIG);
    EXPECT(mgt_config_serialize(c, small, sizeof small, &need) == MGT_OK);
    EXPECT(strlen(small) == 7);
    buf = malloc(need);
    EXPECT(mgt_config_serialize(c, buf, need, &need) == MGT_OK);
    EXPECT(strstr(buf, "[roots]\n") == buf);
    EXPECT(strstr(buf, "\np = 2\n") != NULL);
    free(buf);
    EXPECT(mgt_config_set(c, "out", "capi_out") == MGT_OK);
    EXPECT(mgt_run(c, &exit_code) == MGT_OK);
    EXPECT(exit_code == 0);
    EXPECT(mgt_config_set(c, "tolerance", "0") == MGT_OK);
    EXPECT(mgt_run(c, &exit_code) == MGT_OK);
    EXPECT(exit_code == 2);
    EXPECT(mgt_config_set(c, "tau", "1") == MGT_OK);
    EXPECT(mgt_run(c, &exit_code) == MGT_ERR_CONFIG);
    EXPECT(strstr(mgt_last_error(), "params.tau") != NULL);
    EXPECT(mgt_config_set_preset(c, "nope") == MGT_ERR_CONFIG);
    mgt_config_destroy(c);
}

int main(void)
{
    mgt_set_max_threads(2);
    test_params();
    test_rates();
    test_kernel();
    test_fields();
    test_config();
    if (failures) {
        fprintf(stderr, "%d failure(s)\n", failures);
        return 1;
    }
    printf("all C API checks passed\n");
    return 0;
}
