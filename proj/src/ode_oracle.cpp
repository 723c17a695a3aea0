#include "mgt/ode_oracle.hpp"

#include "dop853_coeffs.hpp"
#include "mgt/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mgt {

namespace {

using ld = long double;
using Vec = std::vector<ld>;

struct Stepper {
    const Rhs& f;
    int n;
    Vec k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, yw, yn, fn;
    Vec r1, r2, r3, r4, r5, r6, r7, r8;

    Stepper(const Rhs& rhs, int dim) : f(rhs), n(dim)
    {
        for (Vec* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &k8, &k9, &k10, &yw, &yn, &fn, &r1, &r2, &r3, &r4, &r5,
                       &r6, &r7, &r8})
            v->assign(n, 0.0L);
    }

    // One trial step from (t, y) with derivative k1 already set; fills yn and returns the raw err3/err5 vectors.
    void trial(ld t, const Vec& y, ld h, Vec& e3, Vec& e5)
    {
        using namespace dop853;
        for (int i = 0; i < n; ++i) yw[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, yw.data(), k2.data());
        for (int i = 0; i < n; ++i) yw[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, yw.data(), k3.data());
        for (int i = 0; i < n; ++i) yw[i] = y[i] + h * (a41 * k1[i] + a43 * k3[i]);
        f(t + c4 * h, yw.data(), k4.data());
        for (int i = 0; i < n; ++i) yw[i] = y[i] + h * (a51 * k1[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, yw.data(), k5.data());
        for (int i = 0; i < n; ++i) yw[i] = y[i] + h * (a61 * k1[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + c6 * h, yw.data(), k6.data());
        for (int i = 0; i < n; ++i) yw[i] = y[i] + h * (a71 * k1[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(t + c7 * h, yw.data(), k7.data());
        for (int i = 0; i < n; ++i)
            yw[i] = y[i] + h * (a81 * k1[i] + a84 * k4[i] + a85 * k5[i] + a86 * k6[i] + a87 * k7[i]);
        f(t + c8 * h, yw.data(), k8.data());
        for (int i = 0; i < n; ++i)
            yw[i] = y[i] + h * (a91 * k1[i] + a94 * k4[i] + a95 * k5[i] + a96 * k6[i] + a97 * k7[i] + a98 * k8[i]);
        f(t + c9 * h, yw.data(), k9.data());
        for (int i = 0; i < n; ++i)
            yw[i] = y[i] + h * (a101 * k1[i] + a104 * k4[i] + a105 * k5[i] + a106 * k6[i] + a107 * k7[i] +
                                a108 * k8[i] + a109 * k9[i]);
        f(t + c10 * h, yw.data(), k10.data());
        for (int i = 0; i < n; ++i)
            yw[i] = y[i] + h * (a111 * k1[i] + a114 * k4[i] + a115 * k5[i] + a116 * k6[i] + a117 * k7[i] +
                                a118 * k8[i] + a119 * k9[i] + a1110 * k10[i]);
        f(t + c11 * h, yw.data(), k2.data());
        for (int i = 0; i < n; ++i)
            yw[i] = y[i] + h * (a121 * k1[i] + a124 * k4[i] + a125 * k5[i] + a126 * k6[i] + a127 * k7[i] +
                                a128 * k8[i] + a129 * k9[i] + a1210 * k10[i] + a1211 * k2[i]);
        f(t + h, yw.data(), k3.data());
        for (int i = 0; i < n; ++i) {
            k4[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] + b11 * k2[i] +
                    b12 * k3[i];
            yn[i] = y[i] + h * k4[i];
            e3[i] = k4[i] - e31 * k1[i] - e32 * k9[i] - e33 * k3[i];
            e5[i] = e51 * k1[i] + e56 * k6[i] + e57 * k7[i] + e58 * k8[i] + e59 * k9[i] + e510 * k10[i] +
                    e511 * k2[i] + e512 * k3[i];
        }
    }

    // Dense-output coefficients for the accepted step; fn must hold f(t+h, yn).
    void dense(ld t, const Vec& y, ld h)
    {
        using namespace dop853;
        for (int i = 0; i < n; ++i) {
            r1[i] = y[i];
            r2[i] = yn[i] - y[i];
            r3[i] = h * k1[i] - r2[i];
            r4[i] = r2[i] - h * fn[i] - r3[i];
            r5[i] = d41 * k1[i] + d46 * k6[i] + d47 * k7[i] + d48 * k8[i] + d49 * k9[i] + d410 * k10[i] +
                    d411 * k2[i] + d412 * k3[i];
            r6[i] = d51 * k1[i] + d56 * k6[i] + d57 * k7[i] + d58 * k8[i] + d59 * k9[i] + d510 * k10[i] +
                    d511 * k2[i] + d512 * k3[i];
            r7[i] = d61 * k1[i] + d66 * k6[i] + d67 * k7[i] + d68 * k8[i] + d69 * k9[i] + d610 * k10[i] +
                    d611 * k2[i] + d612 * k3[i];
            r8[i] = d71 * k1[i] + d76 * k6[i] + d77 * k7[i] + d78 * k8[i] + d79 * k9[i] + d710 * k10[i] +
                    d711 * k2[i] + d712 * k3[i];
        }
        for (int i = 0; i < n; ++i)
            yw[i] = y[i] + h * (a141 * k1[i] + a147 * k7[i] + a148 * k8[i] + a149 * k9[i] + a1410 * k10[i] +
                                a1411 * k2[i] + a1412 * k3[i] + a1413 * fn[i]);
        f(t + c14 * h, yw.data(), k10.data());
        for (int i = 0; i < n; ++i)
            yw[i] = y[i] + h * (a151 * k1[i] + a156 * k6[i] + a157 * k7[i] + a158 * k8[i] + a1511 * k2[i] +
                                a1512 * k3[i] + a1513 * fn[i] + a1514 * k10[i]);
        f(t + c15 * h, yw.data(), k2.data());
        for (int i = 0; i < n; ++i)
            yw[i] = y[i] + h * (a161 * k1[i] + a166 * k6[i] + a167 * k7[i] + a168 * k8[i] + a169 * k9[i] +
                                a1613 * fn[i] + a1614 * k10[i] + a1615 * k2[i]);
        f(t + c16 * h, yw.data(), k3.data());
        for (int i = 0; i < n; ++i) {
            r5[i] = h * (r5[i] + d413 * fn[i] + d414 * k10[i] + d415 * k2[i] + d416 * k3[i]);
            r6[i] = h * (r6[i] + d513 * fn[i] + d514 * k10[i] + d515 * k2[i] + d516 * k3[i]);
            r7[i] = h * (r7[i] + d613 * fn[i] + d614 * k10[i] + d615 * k2[i] + d616 * k3[i]);
            r8[i] = h * (r8[i] + d713 * fn[i] + d714 * k10[i] + d715 * k2[i] + d716 * k3[i]);
        }
    }

    Vec interp(ld s) const
    {
        ld s1 = 1.0L - s;
        Vec out(n);
        for (int i = 0; i < n; ++i) {
            ld a6 = r7[i] + s * r8[i];
            ld a5 = r6[i] + a6 * s1;
            ld a4 = r5[i] + a5 * s;
            ld a3 = r4[i] + a4 * s1;
            ld a2 = r3[i] + a3 * s;
            ld a1 = r2[i] + a2 * s1;
            out[i] = r1[i] + s * a1;
        }
        return out;
    }
};

ld initial_step(const Rhs& f, const Vec& y, const Vec& dy, ld t, ld span, const Vec& sc)
{
    int n = static_cast<int>(y.size());
    ld dnf = 0, dny = 0;
    for (int i = 0; i < n; ++i) {
        dnf += (dy[i] / sc[i]) * (dy[i] / sc[i]);
        dny += (y[i] / sc[i]) * (y[i] / sc[i]);
    }
    ld h = (dnf <= 1e-10L || dny <= 1e-10L) ? 1e-6L : std::sqrt(dny / dnf) * 0.01L;
    h = std::min(h, span);
    Vec y1(n), f1(n);
    for (int i = 0; i < n; ++i) y1[i] = y[i] + h * dy[i];
    f(t + h, y1.data(), f1.data());
    ld der2 = 0;
    for (int i = 0; i < n; ++i) {
        ld d = (f1[i] - dy[i]) / sc[i];
        der2 += d * d;
    }
    der2 = std::sqrt(der2) / h;
    ld der12 = std::max(std::fabs(der2), std::sqrt(dnf));
    ld h1 = der12 <= 1e-15L ? std::max(1e-6L, h * 1e-3L) : std::pow(0.01L / der12, 1.0L / 8.0L);
    return std::min({100 * h, h1, span});
}

}  // namespace

OdeResult dop853_solve(const Rhs& f, std::vector<long double> y0, long double t0,
                       const std::vector<long double>& times, long double tol)
{
    if (!(tol > 0)) throw Error(Code::InvalidArgument, "tolerance must be positive");
    if (times.empty()) throw Error(Code::InvalidArgument, "no output times");
    for (size_t i = 0; i < times.size(); ++i)
        if (times[i] < t0 || (i > 0 && times[i] <= times[i - 1]))
            throw Error(Code::InvalidArgument, "output times must be increasing and >= t0");
    const int n = static_cast<int>(y0.size());
    const ld T = times.back();
    const ld uround = std::numeric_limits<ld>::epsilon();
    Stepper st(f, n);
    OdeResult res;

    Vec y = y0, runmax(n);
    for (int i = 0; i < n; ++i) runmax[i] = std::fabs(y[i]);
    auto scale_of = [&](const Vec& a, const Vec& b) {
        Vec sc(n);
        ld floor = 0;
        for (int i = 0; i < n; ++i) floor = std::max(floor, runmax[i]);
        floor = std::max(floor, 1.0L) * 1e-300L;
        for (int i = 0; i < n; ++i)
            sc[i] = tol * std::max({runmax[i], std::fabs(a[i]), std::fabs(b[i])}) + floor;
        return sc;
    };

    size_t next = 0;
    while (next < times.size() && times[next] == t0) res.states.push_back(y), ++next;
    if (next == times.size()) return res;

    ld t = t0;
    f(t, y.data(), st.k1.data());
    Vec sc0 = scale_of(y, y);
    for (int i = 0; i < n; ++i)
        if (sc0[i] <= 1e-299L) sc0[i] = tol * 1e-3L;
    ld h = initial_step(f, y, st.k1, t, T - t0, sc0);
    bool reject = false;
    Vec e3(n), e5(n);
    const long max_steps = 50000000;
    ld err_sum = 0;

    while (t < T) {
        if (res.steps > max_steps) throw Error(Code::StepFailure, "step budget exhausted");
        if (0.1L * std::fabs(h) <= std::fabs(t) * uround || h <= 0)
            throw Error(Code::StepFailure, "step size underflow");
        if (t + 1.01L * h >= T) h = T - t;
        st.trial(t, y, h, e3, e5);
        Vec sc = scale_of(y, st.yn);
        ld err3 = 0, err5 = 0;
        for (int i = 0; i < n; ++i) {
            err3 += (e3[i] / sc[i]) * (e3[i] / sc[i]);
            err5 += (e5[i] / sc[i]) * (e5[i] / sc[i]);
        }
        ld deno = err5 + 0.01L * err3;
        if (deno <= 0) deno = 1;
        ld err = std::fabs(h) * err5 * std::sqrt(1.0L / (n * deno));
        ld fac11 = std::pow(err, 0.125L);
        ld fac = std::max(1.0L / 6.0L, std::min(1.0L / 0.333L, fac11 / 0.9L));
        if (!(err == err)) throw Error(Code::StepFailure, "non-finite error estimate");
        if (err <= 1.0L) {
            f(t + h, st.yn.data(), st.fn.data());
            ld tn = t + h;
            bool need_dense = next < times.size() && times[next] <= tn;
            if (need_dense) st.dense(t, y, h);
            while (next < times.size() && times[next] <= tn) {
                if (times[next] == tn)
                    res.states.push_back(st.yn);
                else
                    res.states.push_back(st.interp((times[next] - t) / h));
                ++next;
            }
            ld tmax = 0;
            for (int i = 0; i < n; ++i) tmax = std::max(tmax, sc[i] / tol);
            err_sum += err * tol * tmax;
            y = st.yn;
            st.k1 = st.fn;
            for (int i = 0; i < n; ++i) runmax[i] = std::max(runmax[i], std::fabs(y[i]));
            t = (t + h >= T) ? T : tn;
            ++res.steps;
            ld hnew = h / fac;
            if (reject) hnew = std::min(hnew, h);
            reject = false;
            h = hnew;
        } else {
            h = h / std::min(1.0L / 0.333L, fac11 / 0.9L);
            reject = true;
        }
    }
    while (next < times.size()) res.states.push_back(y), ++next;
    res.est_error = T > t0 ? err_sum / (T - t0) : 0;
    return res;
}

namespace {

std::vector<long double> sample_grid(double T, const std::vector<double>& times)
{
    if (!(T > 0)) throw Error(Code::InvalidArgument, "T must be positive");
    std::vector<long double> ts;
    if (times.empty()) {
        ts = {0.0L, static_cast<long double>(T)};
    } else {
        for (double x : times) ts.push_back(x);
        if (ts.front() != 0.0L) ts.insert(ts.begin(), 0.0L);
    }
    return ts;
}

ModeTrajectory to_trajectory(const OdeResult& r, const std::vector<long double>& ts)
{
    ModeTrajectory out;
    for (size_t i = 0; i < ts.size(); ++i) {
        out.times.push_back(static_cast<double>(ts[i]));
        std::array<double, 3> s{};
        for (size_t j = 0; j < r.states[i].size() && j < 3; ++j) s[j] = static_cast<double>(r.states[i][j]);
        out.states.push_back(s);
    }
    out.est_error = static_cast<double>(r.est_error);
    out.steps = r.steps;
    return out;
}

}  // namespace

ModeTrajectory integrate_mode(const ModelParams& p, double r, const std::array<double, 3>& init, double T,
                              double tol, const std::vector<double>& times)
{
    if (!(tol > 0)) throw Error(Code::InvalidArgument, "tolerance must be positive");
    const ld tau = p.tau, beta = p.beta, r2 = static_cast<ld>(r) * r;
    Rhs f = [=](ld, const ld* y, ld* dy) {
        dy[0] = y[1];
        dy[1] = y[2];
        dy[2] = -(r2 * y[0] + beta * r2 * y[1] + y[2]) / tau;
    };
    auto ts = sample_grid(T, times);
    auto res = dop853_solve(f, {init[0], init[1], init[2]}, 0.0L, ts, tol);
    return to_trajectory(res, ts);
}

ModeTrajectory integrate_visco_mode(double beta, double r, const std::array<double, 2>& init, double T, double tol,
                                    const std::vector<double>& times)
{
    if (!(tol > 0)) throw Error(Code::InvalidArgument, "tolerance must be positive");
    const ld b = beta, r2 = static_cast<ld>(r) * r;
    Rhs f = [=](ld, const ld* y, ld* dy) {
        dy[0] = y[1];
        dy[1] = -r2 * y[0] - b * r2 * y[1];
    };
    auto ts = sample_grid(T, times);
    auto res = dop853_solve(f, {init[0], init[1]}, 0.0L, ts, tol);
    auto out = to_trajectory(res, ts);
    for (size_t i = 0; i < out.states.size(); ++i) {
        auto& s = out.states[i];
        s[2] = static_cast<double>(-r2 * res.states[i][0] - b * r2 * res.states[i][1]);
    }
    return out;
}

}  // namespace mgt
