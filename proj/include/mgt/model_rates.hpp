#pragma once

#include <string>

namespace mgt {

struct ModelParams {
    double tau = 0.5;
    double beta = 1.0;
};

// Throws ConservativeCase or NonDissipative.
ModelParams validate_params(double tau, double beta);

// a in (1+t)^a, b in (ln(e+t))^b; when pure_log_of_t the law is (ln t)^b.
struct RateSpec {
    double power_t = 0.0;
    double power_log = 0.0;
    bool pure_log_of_t = false;

    double operator()(double t) const;
};

RateSpec rate_D_spec(int n);
RateSpec rate_F_spec(double m, int n, double s);
RateSpec rate_g_tilde_spec(int n, double s);
RateSpec rate_h_spec(double s);

double rate_D(int n, double t);
double rate_F(double m, int n, double s, double t);
double rate_g_tilde(int n, double s, double t);
double rate_h(double s, double t);

// Index of the F branch: 0 for q<2m, 1 for q=2m, 2 for 2m<q<2+m, 3 for q>=2+m.
int rate_F_branch(double m, int n, double s);

struct Admissibility {
    bool ok = false;
    std::string reason;
};

Admissibility global_existence_admissible(int n, double s, double p);
bool blowup_admissible(int n, double p);

}  // namespace mgt
