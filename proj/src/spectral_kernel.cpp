#include "mgt/spectral_kernel.hpp"

#include "mgt/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace mgt {

namespace {

using Mat3c = std::array<std::array<cplx, 3>, 3>;

struct Monic {
    double a2, a1, a0;

    cplx eval(cplx x) const { return ((x + a2) * x + a1) * x + a0; }
    cplx deriv(cplx x) const { return (3.0 * x + 2.0 * a2) * x + a1; }
};

cplx polish(const Monic& q, cplx x)
{
    for (int it = 0; it < 3; ++it) {
        cplx d = q.deriv(x);
        if (d == 0.0) break;
        cplx y = x - q.eval(x) / d;
        if (!(std::abs(q.eval(y)) < std::abs(q.eval(x)))) break;
        x = y;
    }
    return x;
}

// Divided difference f[a,b] of f(z)=e^{zt}.
cplx dd2(cplx a, cplx b, double t)
{
    cplx z = (b - a) * t;
    if (std::abs(z) < 1.0) return t * std::exp(a * t) * phi1(z);
    return (std::exp(b * t) - std::exp(a * t)) / (b - a);
}

double min_gap_of(const std::array<cplx, 3>& r)
{
    return std::min({std::abs(r[0] - r[1]), std::abs(r[0] - r[2]), std::abs(r[1] - r[2])});
}

Mat3c companion(double r, const ModelParams& p)
{
    Mat3c A{};
    A[0][1] = 1.0;
    A[1][2] = 1.0;
    A[2][0] = -r * r / p.tau;
    A[2][1] = -p.beta * r * r / p.tau;
    A[2][2] = -1.0 / p.tau;
    return A;
}

Mat3c mul(const Mat3c& X, const Mat3c& Y)
{
    Mat3c Z{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            cplx s = 0.0;
            for (int k = 0; k < 3; ++k) s += X[i][k] * Y[k][j];
            Z[i][j] = s;
        }
    return Z;
}

Mat3c shifted(const Mat3c& A, cplx lam)
{
    Mat3c B = A;
    for (int i = 0; i < 3; ++i) B[i][i] -= lam;
    return B;
}

// Newton form f(A) = f[l1] I + f[l1,l2](A-l1) + f[l1,l2,l3](A-l1)(A-l2), closest pair first.
Mat3c confluent_exp(double t, double r, const ModelParams& p, const std::array<cplx, 3>& roots)
{
    int bi = 0, bj = 1;
    double best = std::abs(roots[0] - roots[1]);
    for (auto [i, j] : {std::pair{0, 2}, std::pair{1, 2}}) {
        double g = std::abs(roots[i] - roots[j]);
        if (g < best) {
            best = g;
            bi = i;
            bj = j;
        }
    }
    int bk = 3 - bi - bj;
    cplx l1 = roots[bi], l2 = roots[bj], l3 = roots[bk];
    cplx f1 = std::exp(l1 * t);
    cplx f12 = dd2(l1, l2, t);
    cplx f23 = dd2(l2, l3, t);
    cplx f123 = (f23 - f12) / (l3 - l1);
    Mat3c A = companion(r, p);
    Mat3c B1 = shifted(A, l1);
    Mat3c B12 = mul(B1, shifted(A, l2));
    Mat3c M{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M[i][j] = (i == j ? f1 : 0.0) + f12 * B1[i][j] + f123 * B12[i][j];
    return M;
}

Mat3c partial_fraction_exp(double t, const std::array<cplx, 3>& roots)
{
    Mat3c M{};
    for (int j = 0; j < 3; ++j) {
        cplx la = roots[(j + 1) % 3], lb = roots[(j + 2) % 3], lj = roots[j];
        cplx D = (lj - la) * (lj - lb);
        std::array<cplx, 3> c = {la * lb / D, -(la + lb) / D, 1.0 / D};
        cplx e = std::exp(lj * t);
        cplx pw = 1.0;
        for (int d = 0; d < 3; ++d) {
            for (int m = 0; m < 3; ++m) M[d][m] += c[m] * pw * e;
            pw *= lj;
        }
    }
    return M;
}

double smooth_step(double x)
{
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

}  // namespace

cplx phi1(cplx z)
{
    if (std::abs(z) < 1.0) {
        cplx term = 1.0, sum = 1.0;
        for (int k = 1; k < 22; ++k) {
            term *= z / static_cast<double>(k + 1);
            sum += term;
        }
        return sum;
    }
    return (std::exp(z) - 1.0) / z;
}

ZoneConfig ZoneConfig::defaults(const ModelParams& p)
{
    ZoneConfig z;
    z.eps = 0.1 * std::min(1.0 / std::sqrt(p.beta * p.tau), 1.0);
    z.N = 10.0 * std::max(1.0 / p.beta, 1.0);
    return z;
}

double discriminant(double r, const ModelParams& p)
{
    double b = p.beta, t = p.tau, r2 = r * r;
    double B = 18.0 * b * t + b * b - 27.0 * t * t;
    return r2 * (-4.0 * b * b * b * t * r2 * r2 + B * r2 - 4.0);
}

std::vector<double> degenerate_radii(const ModelParams& p)
{
    std::vector<double> out{0.0};
    double b = p.beta, t = p.tau;
    double B = 18.0 * b * t + b * b - 27.0 * t * t;
    double a = 4.0 * b * b * b * t;
    double disc = B * B - 64.0 * b * b * b * t;
    if (disc < 0.0 || B <= 0.0) return out;
    double xp = (B + std::sqrt(disc)) / (2.0 * a);
    double xm = (4.0 / a) / xp;
    out.push_back(std::sqrt(xm));
    if (xp != xm) out.push_back(std::sqrt(xp));
    std::sort(out.begin(), out.end());
    return out;
}

double root_threshold(double r, const ModelParams& p)
{
    return 1e-6 * std::max(1.0 / p.tau, std::sqrt(p.beta / p.tau) * r);
}

CharacteristicTriple char_roots(double r, const ModelParams& p)
{
    if (r < 0.0) throw Error(Code::InvalidArgument, "frequency magnitude must be nonnegative");
    CharacteristicTriple out;
    if (r == 0.0) {
        out.roots = {cplx(0.0), cplx(0.0), cplx(-1.0 / p.tau)};
        out.min_gap = 0.0;
        out.degenerate = true;
        return out;
    }
    Monic q{1.0 / p.tau, p.beta * r * r / p.tau, r * r / p.tau};
    double sc = std::max(1.0 / p.tau, std::sqrt(p.beta / p.tau) * r);
    Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
    C(0, 0) = -q.a2 / sc;
    C(0, 1) = -q.a1 / (sc * sc);
    C(0, 2) = -q.a0 / (sc * sc * sc);
    C(1, 0) = 1.0;
    C(2, 1) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(C, false);
    auto ev = es.eigenvalues();

    std::vector<cplx> reals, pos;
    for (int i = 0; i < 3; ++i) {
        cplx z = ev(i) * sc;
        if (ev(i).imag() == 0.0)
            reals.push_back(cplx(z.real(), 0.0));
        else if (ev(i).imag() > 0.0)
            pos.push_back(z);
    }
    if (reals.size() == 3) {
        for (auto& z : reals) z = cplx(polish(q, z).real(), 0.0);
        std::sort(reals.begin(), reals.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
        out.roots = {reals[0], reals[1], reals[2]};
    } else if (reals.size() == 1 && pos.size() == 1) {
        cplx z = polish(q, pos[0]);
        cplx x = cplx(polish(q, reals[0]).real(), 0.0);
        out.roots = {cplx(z.real(), std::fabs(z.imag())), cplx(z.real(), -std::fabs(z.imag())), x};
    } else {
        throw Error(Code::Internal, "unexpected eigenvalue structure for real cubic");
    }
    out.min_gap = min_gap_of(out.roots);
    out.degenerate = out.min_gap < root_threshold(r, p);
    if (out.degenerate) {
        // Rebuild the close pair from the isolated root so the symmetric functions stay exact.
        int k = 0;
        double far = -1.0;
        for (int i = 0; i < 3; ++i) {
            double g = std::min(std::abs(out.roots[i] - out.roots[(i + 1) % 3]),
                                std::abs(out.roots[i] - out.roots[(i + 2) % 3]));
            if (g > far) {
                far = g;
                k = i;
            }
        }
        double l3 = polish(q, cplx(out.roots[k].real(), 0.0)).real();
        double P = -r * r / (p.tau * l3);
        // Two Vieta forms for the pair sum; take the one with less cancellation.
        double S = -1.0 / p.tau - l3;
        double e2 = p.beta * r * r / p.tau, S2 = (e2 - P) / l3;
        if (std::fabs(S) * std::max(std::fabs(e2), std::fabs(P)) < std::fabs(e2 - P) * std::max(1.0 / p.tau, std::fabs(l3)))
            S = S2;
        double d = S * S / 4.0 - P;
        cplx a, b;
        if (d < 0.0) {
            a = cplx(S / 2.0, std::sqrt(-d));
            b = std::conj(a);
        } else {
            double big = S / 2.0 + std::copysign(std::sqrt(d), S);
            a = cplx(big, 0.0);
            b = cplx(big != 0.0 ? P / big : 0.0, 0.0);
        }
        out.roots = {a, b, cplx(l3, 0.0)};
        if (d >= 0.0)
            std::sort(out.roots.begin(), out.roots.end(), [](cplx u, cplx v) { return u.real() > v.real(); });
        out.min_gap = min_gap_of(out.roots);
    }
    return out;
}

CharacteristicTriple asymptotic_roots(double r, const ModelParams& p, Regime regime)
{
    if (!(r > 0.0)) throw Error(Code::InvalidArgument, "asymptotic roots require r > 0");
    double b = p.beta, t = p.tau;
    CharacteristicTriple out;
    if (regime == Regime::Small) {
        double re = -(b - t) * r * r / 2.0;
        out.roots = {cplx(re, r), cplx(re, -r), cplx(-1.0 / t + (b - t) * r * r, 0.0)};
    } else {
        double w = std::sqrt(b / t) * r, re = -(b - t) / (2.0 * b * t);
        out.roots = {cplx(-1.0 / b, 0.0), cplx(re, w), cplx(re, -w)};
    }
    out.min_gap = min_gap_of(out.roots);
    out.degenerate = out.min_gap < root_threshold(r, p);
    return out;
}

std::array<std::array<double, 3>, 3> mode_propagator(double t, double r, const ModelParams& p)
{
    if (t == 0.0) return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    CharacteristicTriple tr = char_roots(r, p);
    Mat3c M = tr.degenerate ? confluent_exp(t, r, p, tr.roots) : partial_fraction_exp(t, tr.roots);
    std::array<std::array<double, 3>, 3> out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = M[i][j].real();
    return out;
}

KernelValues kernel_values(double t, double r, const ModelParams& p)
{
    if (t < 0.0) throw Error(Code::InvalidArgument, "kernel requires t >= 0");
    auto M = mode_propagator(t, r, p);
    KernelValues kv;
    for (int m = 0; m < 3; ++m)
        for (int d = 0; d < 3; ++d) kv.K[m][d] = M[d][m];
    return kv;
}

double mid_zone_rate(const ModelParams& p, const ZoneConfig& z)
{
    auto top = [&](double r) {
        auto tr = char_roots(r, p);
        return std::max({tr.roots[0].real(), tr.roots[1].real(), tr.roots[2].real()});
    };
    const int n = 200;
    double le = std::log(z.eps), ln = std::log(z.N);
    int best = 0;
    double bv = -1e300;
    for (int i = 0; i <= n; ++i) {
        double v = top(std::exp(le + (ln - le) * i / n));
        if (v > bv) {
            bv = v;
            best = i;
        }
    }
    double a = le + (ln - le) * std::max(best - 1, 0) / n;
    double b = le + (ln - le) * std::min(best + 1, n) / n;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = top(std::exp(c)), fd = top(std::exp(d));
    for (int it = 0; it < 60; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = top(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = top(std::exp(d));
        }
    }
    bv = std::max({bv, fc, fd});
    return -bv;
}

double envelope_bound(double t, double r, const ModelParams& p, const ZoneConfig& z)
{
    if (t < 0.0) throw Error(Code::InvalidArgument, "envelope requires t >= 0");
    double b = p.beta, ta = p.tau;
    if (r < z.eps) {
        double sr = r > 0.0 ? std::fabs(std::sin(r * t)) / r : t;
        return (std::fabs(std::cos(r * t)) + sr) * std::exp(-(b - ta) * r * r * t / 2.0) + std::exp(-t / ta);
    }
    if (r <= z.N) return std::exp(-mid_zone_rate(p, z) * t);
    double rate = std::min((b - ta) / (2.0 * b * ta), 1.0 / b);
    return std::exp(-rate * t) / (r * r);
}

double leading_profile_J(double t, double r, const ModelParams& p, const ZoneConfig& z)
{
    if (r >= z.eps) throw Error(Code::OutOfZone, "leading profile requires r < eps");
    double b = p.beta, ta = p.tau, r2 = r * r;
    double T0 = 1.0 / ta - 1.5 * (b - ta) * r2;
    double sr = r > 0.0 ? std::sin(r * t) / r : t;
    double inner = sr * T0 + std::exp(-t / ta + 1.5 * (b - ta) * r2 * t) - std::cos(r * t);
    return std::exp(-(b - ta) * r2 * t / 2.0) / (T0 * T0 + r2) * inner;
}

ZoneWeights zone_cutoffs(double r, const ZoneConfig& z)
{
    double w = z.smoothing;
    ZoneWeights out;
    out.inner = 1.0 - smooth_step((r / z.eps - (1.0 - w)) / (2.0 * w));
    out.outer = smooth_step((r / z.N - (1.0 - w)) / (2.0 * w));
    out.mid = std::max(0.0, 1.0 - out.inner - out.outer);
    return out;
}

ViscoKernel visco_kernel(double t, double r, double beta)
{
    if (t < 0.0) throw Error(Code::InvalidArgument, "kernel requires t >= 0");
    double r2 = r * r;
    cplx disc = cplx(beta * beta * r2 * r2 - 4.0 * r2, 0.0);
    cplx sq = std::sqrt(disc);
    cplx mb = (-beta * r2 - sq) / 2.0;
    cplx ms = mb != 0.0 ? cplx(r2) / mb : cplx(0.0);
    if (disc.real() < 0.0) ms = std::conj(mb);
    cplx f1 = std::exp(mb * t);
    cplx f12 = dd2(mb, ms, t);
    // e^{Bt} = f1 I + f12 (B - mb), B = [[0,1],[-r2,-beta r2]]
    cplx m00 = f1 + f12 * (0.0 - mb), m01 = f12;
    cplx m10 = f12 * (-r2), m11 = f1 + f12 * (-beta * r2 - mb);
    ViscoKernel v;
    v.V0 = m00.real();
    v.V0t = m10.real();
    v.V1 = m01.real();
    v.V1t = m11.real();
    v.V0tt = -beta * r2 * v.V0t - r2 * v.V0;
    v.V1tt = -beta * r2 * v.V1t - r2 * v.V1;
    return v;
}

}  // namespace mgt
