#include "mgt/field_solver.hpp"

#include "mgt/error.hpp"
#include "mgt/parallel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>

namespace mgt {

struct GridData {
    int n = 1;
    double L = 1.0;
    int N = 2;
    std::size_t total = 0;
    std::vector<std::array<int, 3>> k;
    std::vector<int> shell;
    std::vector<double> radius;
    std::vector<double> shell_r;
    std::vector<char> keep;
    std::vector<std::size_t> partner;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    ~GridData()
    {
        std::lock_guard<std::mutex> lk(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }

    static std::mutex& planner_mutex()
    {
        static std::mutex m;
        return m;
    }
};

namespace {

int wrap(int j, int N) { return j < N / 2 ? j : j - N; }

int parity(const std::array<int, 3>& k) { return ((k[0] + k[1] + k[2]) % 2 + 2) % 2; }

}  // namespace

Grid::Grid(int n, double L, int N)
{
    if (n < 1 || n > 3) throw Error(Code::UnsupportedDimension, "box solver supports n = 1, 2, 3");
    if (!(L > 0.0) || !std::isfinite(L)) throw Error(Code::InvalidArgument, "box length must be positive");
    if (N < 2 || (N & (N - 1)) != 0) throw Error(Code::InvalidArgument, "N must be a power of two");
    auto d = std::make_shared<GridData>();
    d->n = n;
    d->L = L;
    d->N = N;
    d->total = 1;
    for (int i = 0; i < n; ++i) d->total *= static_cast<std::size_t>(N);
    d->k.resize(d->total);
    d->shell.resize(d->total);
    d->radius.resize(d->total);
    d->keep.resize(d->total);
    d->partner.resize(d->total);
    std::map<long, int> shells;
    for (std::size_t i = 0; i < d->total; ++i) {
        std::array<int, 3> idx{0, 0, 0};
        std::size_t rem = i;
        for (int a = n - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % N);
            rem /= N;
        }
        std::array<int, 3> kk{0, 0, 0};
        long k2 = 0;
        bool keep = true;
        std::size_t part = 0;
        for (int a = 0; a < n; ++a) {
            kk[a] = wrap(idx[a], N);
            k2 += static_cast<long>(kk[a]) * kk[a];
            if (3 * std::abs(kk[a]) > N) keep = false;
            part = part * N + static_cast<std::size_t>((N - idx[a]) % N);
        }
        d->k[i] = kk;
        d->keep[i] = keep;
        d->partner[i] = part;
        auto it = shells.find(k2);
        if (it == shells.end()) it = shells.emplace(k2, 0).first;
        d->radius[i] = 2.0 * M_PI * std::sqrt(static_cast<double>(k2)) / L;
    }
    int id = 0;
    for (auto& [k2, sid] : shells) {
        sid = id++;
        d->shell_r.push_back(2.0 * M_PI * std::sqrt(static_cast<double>(k2)) / L);
    }
    for (std::size_t i = 0; i < d->total; ++i) {
        long k2 = 0;
        for (int a = 0; a < n; ++a) k2 += static_cast<long>(d->k[i][a]) * d->k[i][a];
        d->shell[i] = shells[k2];
    }
    {
        std::lock_guard<std::mutex> lk(GridData::planner_mutex());
        std::vector<int> dims(n, N);
        std::vector<cplx> a(d->total), b(d->total);
        auto* pa = reinterpret_cast<fftw_complex*>(a.data());
        auto* pb = reinterpret_cast<fftw_complex*>(b.data());
        d->fwd = fftw_plan_dft(n, dims.data(), pa, pb, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        d->bwd = fftw_plan_dft(n, dims.data(), pa, pb, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (!d->fwd || !d->bwd) throw Error(Code::Internal, "FFT planning failed");
    d_ = std::move(d);
}

int Grid::dim() const { return d_->n; }
double Grid::length() const { return d_->L; }
int Grid::points() const { return d_->N; }
std::size_t Grid::size() const { return d_->total; }
double Grid::dx() const { return d_->L / d_->N; }
double Grid::cell_volume() const { return std::pow(dx(), d_->n); }
std::array<int, 3> Grid::wave_index(std::size_t i) const { return d_->k[i]; }
double Grid::radius(std::size_t i) const { return d_->radius[i]; }
int Grid::shell(std::size_t i) const { return d_->shell[i]; }
const std::vector<double>& Grid::shell_radii() const { return d_->shell_r; }
bool Grid::dealiased(std::size_t i) const { return d_->keep[i] != 0; }

std::array<double, 3> Grid::position(std::size_t i) const
{
    std::array<double, 3> x{0.0, 0.0, 0.0};
    std::size_t rem = i;
    for (int a = d_->n - 1; a >= 0; --a) {
        x[a] = -d_->L / 2.0 + static_cast<double>(rem % d_->N) * dx();
        rem /= d_->N;
    }
    return x;
}

std::vector<cplx> Grid::forward(const std::vector<double>& f) const
{
    if (f.size() != d_->total) throw Error(Code::InvalidArgument, "sample count does not match grid");
    std::vector<cplx> in(f.begin(), f.end()), out(d_->total);
    fftw_execute_dft(d_->fwd, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
    for (std::size_t i = 0; i < d_->total; ++i)
        if (parity(d_->k[i])) out[i] = -out[i];
    enforce_hermitian(out);
    return out;
}

std::vector<double> Grid::backward(const std::vector<cplx>& g) const
{
    if (g.size() != d_->total) throw Error(Code::InvalidArgument, "mode count does not match grid");
    std::vector<cplx> in(g), out(d_->total);
    for (std::size_t i = 0; i < d_->total; ++i)
        if (parity(d_->k[i])) in[i] = -in[i];
    fftw_execute_dft(d_->bwd, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
    std::vector<double> r(d_->total);
    double inv = 1.0 / static_cast<double>(d_->total);
    for (std::size_t i = 0; i < d_->total; ++i) r[i] = out[i].real() * inv;
    return r;
}

void Grid::enforce_hermitian(std::vector<cplx>& g) const
{
    for (std::size_t i = 0; i < d_->total; ++i) {
        std::size_t j = d_->partner[i];
        if (j < i) continue;
        if (j == i) {
            g[i] = cplx(g[i].real(), 0.0);
        } else {
            cplx a = 0.5 * (g[i] + std::conj(g[j]));
            g[i] = a;
            g[j] = std::conj(a);
        }
    }
}

double Grid::hermitian_defect(const std::vector<cplx>& g) const
{
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < d_->total; ++i) {
        worst = std::max(worst, std::abs(g[i] - std::conj(g[d_->partner[i]])));
        scale = std::max(scale, std::abs(g[i]));
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

SpectralField::SpectralField(const Grid& g)
    : grid(g), u_hat(g.size()), ut_hat(g.size()), utt_hat(g.size())
{
}

SpectralField make_field(const Grid& grid, const Sampler& u0, const Sampler& u1, const Sampler& u2)
{
    SpectralField f(grid);
    std::size_t n = grid.size();
    const Sampler* s[3] = {&u0, &u1, &u2};
    std::vector<cplx>* dst[3] = {&f.u_hat, &f.ut_hat, &f.utt_hat};
    for (int slot = 0; slot < 3; ++slot) {
        if (!*s[slot]) continue;
        std::vector<double> v(n);
        double vmax = 0.0, edge = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto x = grid.position(i);
            v[i] = (*s[slot])(x);
            vmax = std::max(vmax, std::fabs(v[i]));
            bool on_edge = false;
            for (int a = 0; a < grid.dim(); ++a)
                if (x[a] <= -grid.length() / 2.0 + 0.5 * grid.dx()) on_edge = true;
            if (on_edge) edge = std::max(edge, std::fabs(v[i]));
        }
        if (edge > 1e-12 * vmax) f.boundary_warning = true;
        *dst[slot] = grid.forward(v);
    }
    return f;
}

namespace {

using Prop = std::array<std::array<double, 3>, 3>;

std::vector<Prop> shell_propagators(const Grid& g, const ModelParams& p, double h)
{
    const auto& rs = g.shell_radii();
    std::vector<Prop> out(rs.size());
    parallel_for(rs.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t s = b; s < e; ++s) out[s] = mode_propagator(h, rs[s], p);
    });
    return out;
}

void apply(const Grid& g, const std::vector<Prop>& E, std::vector<cplx>& u, std::vector<cplx>& ut,
           std::vector<cplx>& utt)
{
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const Prop& M = E[g.shell(i)];
            cplx y0 = u[i], y1 = ut[i], y2 = utt[i];
            u[i] = M[0][0] * y0 + M[0][1] * y1 + M[0][2] * y2;
            ut[i] = M[1][0] * y0 + M[1][1] * y1 + M[1][2] * y2;
            utt[i] = M[2][0] * y0 + M[2][1] * y1 + M[2][2] * y2;
        }
    });
}

// |u|^p transformed and truncated by the 2/3 rule.
std::vector<cplx> nonlinearity(const Grid& g, const std::vector<double>& u, double power)
{
    std::vector<double> w(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) w[i] = std::pow(std::fabs(u[i]), power);
    auto W = g.forward(w);
    for (std::size_t i = 0; i < W.size(); ++i)
        if (!g.dealiased(i)) W[i] = 0.0;
    return W;
}

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return INFINITY;
        m = std::max(m, std::fabs(x));
    }
    return m;
}

struct Stage {
    SpectralField next;
    SpectralField pred;
    std::vector<double> u_next;
    std::vector<double> u_pred;
};

Stage heun(const SpectralField& s, const std::vector<cplx>& Nn,
           const ModelParams& p, double power, double h, bool nonlinear, double overflow_at)
{
    const Grid& g = s.grid;
    auto E = shell_propagators(g, p, h);
    SpectralField lin = s;
    apply(g, E, lin.u_hat, lin.ut_hat, lin.utt_hat);
    lin.t = s.t + h;
    Stage st{lin, lin, {}, {}};
    if (!nonlinear) {
        st.u_next = g.backward(lin.u_hat);
        st.u_pred = st.u_next;
        return st;
    }
    // E b N_n
    std::vector<cplx> z0(g.size()), z1(g.size()), z2(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) z2[i] = Nn[i] / p.tau;
    apply(g, E, z0, z1, z2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        st.pred.u_hat[i] += h * z0[i];
        st.pred.ut_hat[i] += h * z1[i];
        st.pred.utt_hat[i] += h * z2[i];
    }
    st.u_pred = g.backward(st.pred.u_hat);
    double mp = max_abs(st.u_pred);
    if (!(mp <= overflow_at)) throw Error(Code::Overflow, "field magnitude exceeded threshold in predictor");
    auto Ns = nonlinearity(g, st.u_pred, power);
    for (std::size_t i = 0; i < g.size(); ++i) {
        st.next.u_hat[i] += 0.5 * h * z0[i];
        st.next.ut_hat[i] += 0.5 * h * z1[i];
        st.next.utt_hat[i] += 0.5 * h * (z2[i] + Ns[i] / p.tau);
    }
    st.u_next = g.backward(st.next.u_hat);
    double mn = max_abs(st.u_next);
    if (!(mn <= overflow_at)) throw Error(Code::Overflow, "field magnitude exceeded threshold in corrector");
    return st;
}

HistoryPoint record(const SpectralField& f, const std::vector<double>& u_phys)
{
    return {f.t, field_l2(f.grid, f.u_hat), max_abs(u_phys), field_hs(f.grid, f.u_hat, 1.0)};
}

}  // namespace

SpectralField linear_evolve(const SpectralField& state, const ModelParams& p, double t_target)
{
    if (t_target < state.t) throw Error(Code::InvalidArgument, "t_target precedes state time");
    SpectralField out = state;
    if (t_target == state.t) return out;
    auto E = shell_propagators(state.grid, p, t_target - state.t);
    apply(state.grid, E, out.u_hat, out.ut_hat, out.utt_hat);
    out.t = t_target;
    return out;
}

SpectralField visco_evolve(const SpectralField& state, double beta, double t_target)
{
    if (t_target < state.t) throw Error(Code::InvalidArgument, "t_target precedes state time");
    if (!(beta > 0.0)) throw Error(Code::InvalidArgument, "beta must be positive");
    SpectralField out = state;
    const Grid& g = state.grid;
    double dt = t_target - state.t;
    const auto& rs = g.shell_radii();
    std::vector<ViscoKernel> K(rs.size());
    for (std::size_t s = 0; s < rs.size(); ++s) K[s] = visco_kernel(dt, rs[s], beta);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& k = K[g.shell(i)];
        cplx v0 = state.u_hat[i], v1 = state.ut_hat[i];
        out.u_hat[i] = k.V0 * v0 + k.V1 * v1;
        out.ut_hat[i] = k.V0t * v0 + k.V1t * v1;
        out.utt_hat[i] = k.V0tt * v0 + k.V1tt * v1;
    }
    out.t = t_target;
    return out;
}

StepResult semilinear_step(const SpectralField& state, const ModelParams& p, double power, double h, bool nonlinear,
                           double overflow_at)
{
    if (!(h > 0.0)) throw Error(Code::InvalidArgument, "step must be positive");
    auto u = state.grid.backward(state.u_hat);
    if (!(max_abs(u) <= overflow_at)) throw Error(Code::Overflow, "field magnitude exceeded threshold");
    std::vector<cplx> Nn = nonlinear ? nonlinearity(state.grid, u, power) : std::vector<cplx>(state.grid.size());
    Stage st = heun(state, Nn, p, power, h, nonlinear, overflow_at);
    return {st.next, st.pred, max_abs(st.u_next)};
}

SpectralField evolve_fixed(const SpectralField& state, const ModelParams& p, double power, double T, int steps)
{
    if (steps < 1) throw Error(Code::InvalidArgument, "steps must be positive");
    double h = (T - state.t) / steps;
    SpectralField cur = state;
    for (int i = 0; i < steps; ++i) cur = semilinear_step(cur, p, power, h).next;
    return cur;
}

EvolveOutcome evolve_until(const SpectralField& state, const ModelParams& p, double power, double T,
                           const EvolveControls& c)
{
    if (!(T > state.t)) throw Error(Code::InvalidArgument, "T must exceed the state time");
    const Grid& g = state.grid;
    const double t0 = state.t, span = T - t0;
    double h_min = c.h_min > 0 ? c.h_min : 1e-10 * T;
    double h_max = c.h_max > 0 ? c.h_max : span / 10.0;
    double theta = c.theta;
    if (!(theta > 0)) theta = 1e8 * (1.0 + max_abs(g.backward(state.utt_hat)));

    std::vector<double> samples;
    for (double s : c.sample_times)
        if (s > t0 && s < T) samples.push_back(s);
    std::sort(samples.begin(), samples.end());
    samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
    samples.push_back(T);

    EvolveOutcome out{EvolveStatus::Completed, state, std::nullopt, {}, 0, 0};
    SpectralField cur = state;
    auto u = g.backward(cur.u_hat);
    auto Nn = c.nonlinear ? nonlinearity(g, u, power) : std::vector<cplx>(g.size());
    out.history.push_back(record(cur, u));
    if (c.on_sample) c.on_sample(cur);

    double h = std::min(c.h_init > 0 ? c.h_init : span / 100.0, h_max);
    double t_prev = t0;
    std::size_t next = 0;
    while (next < samples.size()) {
        double target = samples[next];
        double hs = std::min(h, target - cur.t);
        bool clipped = hs < h;
        bool hit = (target - cur.t) <= hs * (1.0 + 1e-12);
        if (hit) hs = target - cur.t;
        Stage st{cur, cur, {}, {}};
        double err = 0.0;
        bool overflow = false;
        try {
            st = heun(cur, Nn, p, power, hs, c.nonlinear, theta);
            if (c.nonlinear) {
                double d = 0.0, m = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    d = std::max(d, std::fabs(st.u_next[i] - st.u_pred[i]));
                    m = std::max(m, std::fabs(st.u_next[i]));
                }
                err = m > 0.0 ? d / (c.tol * m) : 0.0;
            }
        } catch (const Error& e) {
            if (e.code() != Code::Overflow) throw;
            overflow = true;
        }
        if (overflow || !(err <= 1.0)) {
            ++out.rejected;
            double f = overflow ? 0.25 : std::max(0.2, 0.9 / std::sqrt(err));
            h = hs * f;
            if (h < h_min) {
                out.status = EvolveStatus::Blowup;
                out.blowup_bracket = std::make_pair(t_prev, cur.t);
                break;
            }
            continue;
        }
        t_prev = cur.t;
        cur = st.next;
        if (hit) cur.t = target;
        u = std::move(st.u_next);
        ++out.steps;
        double mu = max_abs(u);
        if (c.nonlinear) Nn = nonlinearity(g, u, power);
        if (mu > theta) {
            out.status = EvolveStatus::Blowup;
            out.blowup_bracket = std::make_pair(t_prev, cur.t);
            out.history.push_back(record(cur, u));
            break;
        }
        if (hit) {
            out.history.push_back(record(cur, u));
            if (c.on_sample) c.on_sample(cur);
            ++next;
        }
        double grow = err > 0.0 ? std::min(2.0, std::max(0.2, 0.9 / std::sqrt(err))) : 2.0;
        double hn = hs * grow;
        if (clipped || hit) hn = std::max(hn, h);
        h = std::min(hn, h_max);
    }
    out.final = cur;
    return out;
}

double fps_total_mass(const SpectralField& state) { return fps_outside_mass(state, {0.0, 0.0, 0.0}, 0.0); }

double fps_outside_mass(const SpectralField& state, const std::array<double, 3>& x0, double R)
{
    const Grid& g = state.grid;
    if (!(R >= 0.0) || R >= g.length() / 2.0) throw Error(Code::RadiusExceedsBox, "R must be below L/2");
    auto u = g.backward(state.u_hat);
    auto ut = g.backward(state.ut_hat);
    std::vector<double> grad2(g.size(), 0.0);
    for (int a = 0; a < g.dim(); ++a) {
        std::vector<cplx> d(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            int k = g.wave_index(i)[a];
            if (2 * std::abs(k) == g.points()) continue;
            d[i] = cplx(0.0, 2.0 * M_PI * k / g.length()) * state.u_hat[i];
        }
        auto da = g.backward(d);
        for (std::size_t i = 0; i < g.size(); ++i) grad2[i] += da[i] * da[i];
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto x = g.position(i);
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) r2 += (x[a] - x0[a]) * (x[a] - x0[a]);
        if (std::sqrt(r2) >= R) sum += u[i] * u[i] + ut[i] * ut[i] + grad2[i];
    }
    return sum * g.cell_volume();
}

double box_length_for(double rho, const ModelParams& p, double T)
{
    return 2.0 * (rho + std::sqrt(p.beta / p.tau) * T) + 4.0;
}

double field_l2(const Grid& g, const std::vector<cplx>& v)
{
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s * g.cell_volume() / static_cast<double>(g.size()));
}

double field_hs(const Grid& g, const std::vector<cplx>& v, double s)
{
    if (s == 0.0) return field_l2(g, v);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double r = g.radius(i);
        if (r == 0.0) continue;
        acc += std::pow(r, 2.0 * s) * std::norm(v[i]);
    }
    return std::sqrt(acc * g.cell_volume() / static_cast<double>(g.size()));
}

double field_linf(const Grid& g, const std::vector<cplx>& v) { return max_abs(g.backward(v)); }

double field_mass(const Grid& g, const std::vector<cplx>& v)
{
    for (std::size_t i = 0; i < v.size(); ++i)
        if (g.radius(i) == 0.0) return v[i].real() * g.cell_volume();
    return 0.0;
}

namespace {

void put_u64(std::ofstream& os, std::uint64_t v)
{
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ofstream& os, double x) { put_u64(os, std::bit_cast<std::uint64_t>(x)); }

}  // namespace

void write_binary(const SpectralField& f, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(Code::IO, "cannot open " + path);
    put_u64(os, static_cast<std::uint64_t>(f.grid.dim()));
    put_u64(os, static_cast<std::uint64_t>(f.grid.points()));
    put_f64(os, f.grid.length());
    put_f64(os, f.t);
    for (double x : f.grid.backward(f.u_hat)) put_f64(os, x);
    if (!os) throw Error(Code::IO, "write failed for " + path);
}

void write_csv_slice(const SpectralField& f, const std::string& path)
{
    const Grid& g = f.grid;
    auto u = g.backward(f.u_hat), ut = g.backward(f.ut_hat), utt = g.backward(f.utt_hat);
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw Error(Code::IO, "cannot open " + path);
    std::fprintf(fp, "x,u,u_t,u_tt\n");
    std::size_t N = static_cast<std::size_t>(g.points());
    std::size_t stride = 1, offset = 0;
    for (int a = 1; a < g.dim(); ++a) stride *= N;
    for (int a = 1; a < g.dim(); ++a) {
        std::size_t st = 1;
        for (int b = a + 1; b < g.dim(); ++b) st *= N;
        offset += (N / 2) * st;
    }
    for (std::size_t j = 0; j < N; ++j) {
        std::size_t i = j * stride + offset;
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g\n", g.position(i)[0], u[i], ut[i], utt[i]);
    }
    std::fclose(fp);
}

}  // namespace mgt
