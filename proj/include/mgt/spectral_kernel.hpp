#pragma once

#include "mgt/model_rates.hpp"

#include <array>
#include <complex>
#include <vector>

namespace mgt {

using cplx = std::complex<double>;

struct CharacteristicTriple {
    std::array<cplx, 3> roots{};
    double min_gap = 0.0;
    bool degenerate = false;
};

// K[m][d] = d-th time derivative of the kernel for unit data in slot m.
struct KernelValues {
    std::array<std::array<double, 3>, 3> K{};

    double operator()(int m, int d) const { return K[m][d]; }
};

struct ZoneConfig {
    double eps = 0.0;
    double N = 0.0;
    double smoothing = 0.1;

    static ZoneConfig defaults(const ModelParams& p);
};

enum class Regime { Small, Large };

double discriminant(double r, const ModelParams& p);
std::vector<double> degenerate_radii(const ModelParams& p);
double root_threshold(double r, const ModelParams& p);

CharacteristicTriple char_roots(double r, const ModelParams& p);
CharacteristicTriple asymptotic_roots(double r, const ModelParams& p, Regime regime);

KernelValues kernel_values(double t, double r, const ModelParams& p);

// Exact per-mode propagator e^{At} of the companion system, row-major [d][m].
std::array<std::array<double, 3>, 3> mode_propagator(double t, double r, const ModelParams& p);

double mid_zone_rate(const ModelParams& p, const ZoneConfig& z);
double envelope_bound(double t, double r, const ModelParams& p, const ZoneConfig& z);
double leading_profile_J(double t, double r, const ModelParams& p, const ZoneConfig& z);

struct ZoneWeights {
    double inner = 0.0;
    double mid = 0.0;
    double outer = 0.0;
};

// Smooth partition of unity over the three zones.
ZoneWeights zone_cutoffs(double r, const ZoneConfig& z);

struct ViscoKernel {
    double V0 = 0.0, V0t = 0.0, V0tt = 0.0;
    double V1 = 0.0, V1t = 0.0, V1tt = 0.0;
};

ViscoKernel visco_kernel(double t, double r, double beta);

// phi1(z) = (e^z - 1)/z with the removable singularity filled in.
cplx phi1(cplx z);

}  // namespace mgt
