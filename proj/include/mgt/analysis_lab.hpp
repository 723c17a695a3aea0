#pragma once

#include "mgt/field_solver.hpp"
#include "mgt/model_rates.hpp"
#include "mgt/spectral_kernel.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mgt {

// ---- norms -------------------------------------------------------------

double norm_L2(const SpectralField& f);
double norm_Hs_dot(const SpectralField& f, double s);
double norm_Linf(const SpectralField& f);
double norm_L1_weighted(const SpectralField& f);
double mass_P(const SpectralField& f);

// ---- radial quadrature -------------------------------------------------

struct RadialData {
    int n = 1;
    std::function<double(double)> profile;  // u2 hat as a function of r
    double mass = 0.0;                      // u2 hat at r = 0
};

// u2 = amplitude * exp(-|x|^2 / width^2).
RadialData gaussian_radial(int n, double width, double amplitude);

double sphere_area(int n);

struct RadialRule {
    std::vector<double> r;
    std::vector<double> w;  // includes r^{n-1}, |S^{n-1}| and (2 pi)^{-n}
};

// Composite 8-point Gauss-Legendre panels on (0, r_end], geometrically graded near 0.
RadialRule radial_rule(int n, double r_end, double panel_width);

double radial_panel_width(double t, const ModelParams& p);
double radial_r_max(const ModelParams& p);

// ||r^s m(t,r) u2hat||_{L2} for a radial multiplier m, integrating outward until the tail is negligible.
double radial_norm(const RadialData& data, const ModelParams& p, double t, double s,
                   const std::function<double(double r)>& multiplier);

std::vector<double> radial_linear_norms(const RadialData& data, const ModelParams& p, double s,
                                        const std::vector<double>& times);

// ---- decay fits --------------------------------------------------------

enum class FitModel { PurePower, PowerTimesLog, LogOnly, Auto };

const char* fit_model_name(FitModel m);

struct DecayFit {
    FitModel model = FitModel::PurePower;
    double exponent_t = 0.0;
    double exponent_log = 0.0;
    double intercept = 0.0;
    std::pair<double, double> window{0.0, 0.0};
    double rms_residual = 0.0;
};

// pure-power: ln v = c + a ln t; log-only: ln v = c + b ln ln t;
// power-times-log: ln v = c + a ln(1+t) + b ln ln(e+t).
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& v, std::pair<double, double> window,
                   FitModel model);

std::vector<double> log_times(double t_lo, double t_hi, int per_decade = 40);

// Least-squares slope of ln y against ln x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---- experiments -------------------------------------------------------

std::vector<double> profile_experiment(const RadialData& data, const ModelParams& p, const std::vector<double>& times);

std::vector<double> approx_relation_experiment(const RadialData& data, const ModelParams& p,
                                               const std::vector<double>& times);

struct SingularLimitParams {
    double k = 0.0;
    double eps1 = 0.05;
    double k_tilde = 0.0;
    double eps2 = 0.05;
    double eps3 = 1.0 / 1600.0;

    static SingularLimitParams defaults(double beta);
};

// Throws ParameterWindowViolation when the energy window for (k, eps1) fails.
void check_energy_window(const SingularLimitParams& s, const ModelParams& p);
// Checks the (k~, eps2, eps3) window used by the solution-limit bound.
void check_solution_window(const SingularLimitParams& s, const ModelParams& p, int n);

// w in u_hat, w_t in ut_hat, w_tt in utt_hat.
double energy_singular(const SpectralField& w, const ModelParams& p, const SingularLimitParams& slp);

struct InitialData {
    Sampler u0, u1, u2;
};

SpectralField difference_field(const SpectralField& u, const SpectralField& v);

struct SweepPoint {
    double tau = 0.0;
    double value = 0.0;
    double dissipation = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double slope = 0.0;
    double dissipation_slope = 0.0;
    bool precondition_warning = false;  // |x| u2 not resolved inside the box
    bool short_span = false;            // tau list spans less than 1.5 decades
};

// prepared = true replaces u2 by Lap u0 + beta Lap u1 built spectrally.
SweepResult singular_limit_sweep(const Grid& grid, const InitialData& data, double beta,
                                 const std::vector<double>& tau_list, double T, bool prepared,
                                 const std::optional<SingularLimitParams>& slp = std::nullopt, int jobs = 1);

SweepResult solution_limit_sweep(const Grid& grid, const InitialData& data, double beta,
                                 const std::vector<double>& tau_list, double T, int jobs = 1);

struct SemilinearDecayResult {
    EvolveOutcome outcome;
    std::vector<double> times, l2, hs, w_l2, w_hs;
    double sup_l2 = 0.0;
    double sup_hs = 0.0;
};

SemilinearDecayResult semilinear_decay_experiment(const Grid& grid, const Sampler& u2, double eps,
                                                  const ModelParams& p, double s, double power, double T,
                                                  const std::vector<double>& sample_times,
                                                  EvolveControls controls = {});

struct BlowupScan {
    EvolveOutcome outcome;
    bool blowup = false;
    bool monotone_final_decade = false;
    std::string verdict;
};

BlowupScan blowup_scan(const Grid& grid, const Sampler& u2, const ModelParams& p, double power, double T,
                       EvolveControls controls = {});

struct FpsCheck {
    double outside = 0.0;
    double total = 0.0;
    double ratio = 0.0;
    double R = 0.0;
};

FpsCheck fps_check(const Grid& grid, const Sampler& u2, const ModelParams& p, double rho, double T, double margin);

struct KernelSample {
    double t = 0.0, tau = 0.0, r = 0.0;
    double rel_err = 0.0;  // worst (m, d) entry, each scaled by its sup over the sampled times
};

struct KernelCheck {
    double max_rel_err = 0.0;
    int samples = 0;
    std::vector<KernelSample> rows;
};

KernelCheck kernel_check(const std::vector<double>& taus, double beta, const std::vector<double>& radii,
                         const std::vector<double>& times, bool include_degenerate, double oracle_tol = 1e-15);

struct RootInvariants {
    double vieta_max = 0.0;
    double partial_fraction_max = 0.0;
    double max_real_part = -1e300;
    int samples = 0;
    int degenerate_skipped = 0;
};

RootInvariants root_invariants(int samples, unsigned seed);

// ---- named data profiles -----------------------------------------------

Sampler gaussian_profile(std::array<double, 3> center, double width, double amplitude, int n);
Sampler bump_profile(std::array<double, 3> center, double radius, double amplitude, int n);
Sampler odd_gaussian_profile(std::array<double, 3> center, double width, double amplitude, int n);

}  // namespace mgt
