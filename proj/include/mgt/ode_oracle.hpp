#pragma once

#include "mgt/model_rates.hpp"

#include <array>
#include <functional>
#include <vector>

namespace mgt {

struct ModeTrajectory {
    std::vector<double> times;
    std::vector<std::array<double, 3>> states;
    double est_error = 0.0;
    long steps = 0;
};

using Rhs = std::function<void(long double t, const long double* y, long double* dy)>;

struct OdeResult {
    std::vector<std::vector<long double>> states;
    long double est_error = 0.0L;
    long steps = 0;
};

// DOP853 with dense output at the given increasing times (first may equal t0).
// Error is controlled relative to the running sup of each component.
OdeResult dop853_solve(const Rhs& f, std::vector<long double> y0, long double t0,
                       const std::vector<long double>& times, long double tol);

// Companion system of tau y''' + y'' + beta r^2 y' + r^2 y = 0.
// Samples at `times` (must include T as last entry if given); defaults to {0, T}.
ModeTrajectory integrate_mode(const ModelParams& p, double r, const std::array<double, 3>& init, double T,
                              double tol, const std::vector<double>& times = {});

// y'' + beta r^2 y' + r^2 y = 0 embedded with a zero third slot.
ModeTrajectory integrate_visco_mode(double beta, double r, const std::array<double, 2>& init, double T,
                                    double tol, const std::vector<double>& times = {});

}  // namespace mgt
