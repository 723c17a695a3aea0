#pragma once

#include "mgt/model_rates.hpp"
#include "mgt/spectral_kernel.hpp"

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mgt {

struct GridData;

// Periodic box [-L/2, L/2)^n with N points per axis, x_j = -L/2 + j L/N.
class Grid {
public:
    Grid(int n, double L, int N);

    int dim() const;
    double length() const;
    int points() const;
    std::size_t size() const;
    double dx() const;
    double cell_volume() const;

    // Integer wave numbers of flat index i along each axis (unused axes are 0).
    std::array<int, 3> wave_index(std::size_t i) const;
    std::array<double, 3> position(std::size_t i) const;
    double radius(std::size_t i) const;
    int shell(std::size_t i) const;
    const std::vector<double>& shell_radii() const;
    bool dealiased(std::size_t i) const;

    std::vector<cplx> forward(const std::vector<double>& f) const;
    std::vector<double> backward(const std::vector<cplx>& g) const;

    // Forces g(-k) = conj(g(k)); self-conjugate modes become real.
    void enforce_hermitian(std::vector<cplx>& g) const;
    double hermitian_defect(const std::vector<cplx>& g) const;

private:
    std::shared_ptr<const GridData> d_;
};

struct SpectralField {
    Grid grid;
    std::vector<cplx> u_hat, ut_hat, utt_hat;
    double t = 0.0;
    bool boundary_warning = false;

    explicit SpectralField(const Grid& g);
};

using Sampler = std::function<double(const std::array<double, 3>& x)>;

SpectralField make_field(const Grid& grid, const Sampler& u0, const Sampler& u1, const Sampler& u2);

SpectralField linear_evolve(const SpectralField& state, const ModelParams& p, double t_target);

// Evolves (u_hat, ut_hat) under v_tt - Lap v - beta Lap v_t = 0; utt_hat receives v_tt.
SpectralField visco_evolve(const SpectralField& state, double beta, double t_target);

struct StepResult {
    SpectralField next;
    SpectralField predictor;
    double max_abs_u = 0.0;
};

// Exponential Heun step for tau u_ttt + u_tt - Lap u - beta Lap u_t = |u|^p.
StepResult semilinear_step(const SpectralField& state, const ModelParams& p, double power, double h,
                           bool nonlinear = true, double overflow_at = 1e300);

struct EvolveControls {
    double h_init = 1e-2;
    double h_min = -1.0;   // default 1e-10 T
    double h_max = -1.0;   // default span / 10
    double theta = -1.0;   // default 1e8 (1 + max|u2|)
    double tol = 1e-6;
    bool nonlinear = true;
    std::vector<double> sample_times;
    std::function<void(const SpectralField&)> on_sample;
};

struct HistoryPoint {
    double t = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double h1 = 0.0;
};

enum class EvolveStatus { Completed, Blowup };

struct EvolveOutcome {
    EvolveStatus status = EvolveStatus::Completed;
    SpectralField final;
    std::optional<std::pair<double, double>> blowup_bracket;
    std::vector<HistoryPoint> history;
    long steps = 0;
    long rejected = 0;
};

EvolveOutcome evolve_until(const SpectralField& state, const ModelParams& p, double power, double T,
                           const EvolveControls& controls);

// Fixed-step semilinear evolution, used for self-convergence studies.
SpectralField evolve_fixed(const SpectralField& state, const ModelParams& p, double power, double T, int steps);

double fps_outside_mass(const SpectralField& state, const std::array<double, 3>& x0, double R);
double fps_total_mass(const SpectralField& state);

// L >= 2 (rho + sqrt(beta/tau) T) + 4.
double box_length_for(double rho, const ModelParams& p, double T);

// Grid-based norms; L2/H^s use Parseval with weight (L/N)^n.
double field_l2(const Grid& g, const std::vector<cplx>& v_hat);
double field_hs(const Grid& g, const std::vector<cplx>& v_hat, double s);
double field_linf(const Grid& g, const std::vector<cplx>& v_hat);
double field_mass(const Grid& g, const std::vector<cplx>& v_hat);

void write_binary(const SpectralField& f, const std::string& path);
void write_csv_slice(const SpectralField& f, const std::string& path);

}  // namespace mgt
