#include "mgt/analysis_lab.hpp"

#include "mgt/error.hpp"
#include "mgt/ode_oracle.hpp"
#include "mgt/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mgt {

namespace {

constexpr double kPi = std::numbers::pi;

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGLx = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGLw = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};

void add_panel(RadialRule& q, double a, double b, double wscale, int n)
{
    double m = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < 8; ++i) {
        double r = m + h * kGLx[i];
        q.r.push_back(r);
        q.w.push_back(h * kGLw[i] * wscale * std::pow(r, n - 1));
    }
}

double radial_factor(int n) { return sphere_area(n) / std::pow(2.0 * kPi, n); }

void check_s_range(double s)
{
    if (!(s >= 0.0 && s <= 2.0)) throw Error(Code::OutOfRange, "s must lie in [0,2]");
}

// Returns true when the list spans less than 1.5 decades; below one decade is an error.
bool check_tau_list(const std::vector<double>& taus, double beta)
{
    if (taus.size() < 4) throw Error(Code::InvalidArgument, "tau list needs at least 4 values");
    double lo = *std::min_element(taus.begin(), taus.end()), hi = *std::max_element(taus.begin(), taus.end());
    for (double t : taus)
        if (!(t > 0.0 && t < beta)) throw Error(Code::InvalidArgument, "every tau must lie in (0, beta)");
    double span = std::log10(hi / lo);
    if (span < 1.0 - 1e-9) throw Error(Code::InvalidArgument, "tau list must span at least one decade");
    return span < 1.5 - 1e-9;
}

}  // namespace

// ---- norms -------------------------------------------------------------

double norm_L2(const SpectralField& f) { return field_l2(f.grid, f.u_hat); }

double norm_Hs_dot(const SpectralField& f, double s)
{
    check_s_range(s);
    return field_hs(f.grid, f.u_hat, s);
}

double norm_Linf(const SpectralField& f) { return field_linf(f.grid, f.u_hat); }

double norm_L1_weighted(const SpectralField& f)
{
    auto u = f.grid.backward(f.u_hat);
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        auto x = f.grid.position(i);
        double r2 = 0.0;
        for (int a = 0; a < f.grid.dim(); ++a) r2 += x[a] * x[a];
        acc += (1.0 + std::sqrt(r2)) * std::fabs(u[i]);
    }
    return acc * f.grid.cell_volume();
}

double mass_P(const SpectralField& f) { return field_mass(f.grid, f.u_hat); }

// ---- radial quadrature -------------------------------------------------

double sphere_area(int n)
{
    if (n < 1) throw Error(Code::InvalidDimension, "n must be at least 1");
    return 2.0 * std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0);
}

RadialData gaussian_radial(int n, double width, double amplitude)
{
    if (n < 1) throw Error(Code::InvalidDimension, "n must be at least 1");
    double c = amplitude * std::pow(kPi * width * width, n / 2.0);
    RadialData d;
    d.n = n;
    d.mass = c;
    d.profile = [c, width](double r) { return c * std::exp(-width * width * r * r / 4.0); };
    return d;
}

RadialRule radial_rule(int n, double r_end, double pw)
{
    RadialRule q;
    double f = radial_factor(n);
    double h0 = std::min(pw, r_end);
    double lo = h0 * std::ldexp(1.0, -30);
    add_panel(q, 0.0, lo, f, n);
    for (int k = 29; k >= 0; --k) add_panel(q, h0 * std::ldexp(1.0, -(k + 1)), h0 * std::ldexp(1.0, -k), f, n);
    for (double a = h0; a < r_end; a += pw) add_panel(q, a, std::min(r_end, a + pw), f, n);
    return q;
}

double radial_panel_width(double t, const ModelParams& p)
{
    double om = std::max(1.0, std::sqrt(p.beta / p.tau));
    if (t <= 0.0) return 0.25;
    return std::min(0.25, 2.0 * kPi / (10.0 * om * t));
}

double radial_r_max(const ModelParams& p) { return 20.0 * std::max(1.0 / p.beta, ZoneConfig::defaults(p).N); }

double radial_norm(const RadialData& data, const ModelParams& p, double t, double s,
                   const std::function<double(double r)>& multiplier)
{
    check_s_range(s);
    const int n = data.n;
    const double f = radial_factor(n);
    const double pw = radial_panel_width(t, p);
    const double r_max = radial_r_max(p);
    const double r_cut = t > 0.0 ? std::sqrt(60.0 / ((p.beta - p.tau) * t)) : r_max;
    auto integrand = [&](double r) {
        double m = multiplier(r) * data.profile(r);
        double rs = s == 0.0 ? 1.0 : std::pow(r, 2.0 * s);
        return rs * m * m * std::pow(r, n - 1);
    };
    auto panel = [&](double a, double b) {
        double m = 0.5 * (a + b), h = 0.5 * (b - a), acc = 0.0;
        for (int i = 0; i < 8; ++i) acc += kGLw[i] * integrand(m + h * kGLx[i]);
        return acc * h * f;
    };
    double h0 = std::min(pw, r_max);
    double sum = panel(0.0, h0 * std::ldexp(1.0, -30));
    for (int k = 29; k >= 0; --k) sum += panel(h0 * std::ldexp(1.0, -(k + 1)), h0 * std::ldexp(1.0, -k));
    int quiet = 0;
    for (double a = h0; a < r_max; a += pw) {
        double c = panel(a, std::min(r_max, a + pw));
        sum += c;
        quiet = (c <= 1e-17 * sum) ? quiet + 1 : 0;
        if (a >= r_cut && quiet >= 20 && sum > 0.0) break;
    }
    return std::sqrt(sum);
}

std::vector<double> radial_linear_norms(const RadialData& data, const ModelParams& p, double s,
                                        const std::vector<double>& times)
{
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times)
        out.push_back(radial_norm(data, p, t, s, [&](double r) { return mode_propagator(t, r, p)[0][2]; }));
    return out;
}

// ---- decay fits --------------------------------------------------------

const char* fit_model_name(FitModel m)
{
    switch (m) {
    case FitModel::PurePower: return "pure-power";
    case FitModel::PowerTimesLog: return "power-times-log";
    case FitModel::LogOnly: return "log-only";
    case FitModel::Auto: return "auto";
    }
    return "unknown";
}

namespace {

DecayFit fit_one(const std::vector<double>& t, const std::vector<double>& v, FitModel model)
{
    const int m = static_cast<int>(t.size());
    int cols = model == FitModel::PowerTimesLog ? 3 : 2;
    Eigen::MatrixXd A(m, cols);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        A(i, 0) = 1.0;
        if (model == FitModel::PurePower) {
            A(i, 1) = std::log(t[i]);
        } else if (model == FitModel::LogOnly) {
            A(i, 1) = std::log(std::log(t[i]));
        } else {
            A(i, 1) = std::log1p(t[i]);
            A(i, 2) = std::log(std::log(std::numbers::e + t[i]));
        }
        y(i) = std::log(v[i]);
    }
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    Eigen::VectorXd res = A * c - y;
    DecayFit f;
    f.model = model;
    f.intercept = c(0);
    if (model == FitModel::PurePower) f.exponent_t = c(1);
    if (model == FitModel::LogOnly) f.exponent_log = c(1);
    if (model == FitModel::PowerTimesLog) {
        f.exponent_t = c(1);
        f.exponent_log = c(2);
    }
    f.rms_residual = std::sqrt(res.squaredNorm() / m);
    return f;
}

}  // namespace

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& v, std::pair<double, double> window,
                   FitModel model)
{
    if (t.size() != v.size()) throw Error(Code::InvalidArgument, "series length mismatch");
    if (!(window.first < window.second)) throw Error(Code::InvalidArgument, "window must satisfy t_lo < t_hi");
    std::vector<double> tt, vv;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= window.first && t[i] <= window.second) {
            tt.push_back(t[i]);
            vv.push_back(v[i]);
        }
    if (tt.size() < 8) throw Error(Code::InsufficientData, "need at least 8 points inside the window");
    for (double x : vv)
        if (!(x > 0.0)) throw Error(Code::NonPositiveValues, "fit requires positive values");
    for (double x : tt)
        if (!(x > 0.0)) throw Error(Code::InvalidArgument, "fit requires t > 0");
    bool log_ok = std::all_of(tt.begin(), tt.end(), [](double x) { return x > 1.0; });
    DecayFit out;
    if (model == FitModel::Auto) {
        DecayFit pp = fit_one(tt, vv, FitModel::PurePower);
        DecayFit best = pp;
        if (log_ok) {
            DecayFit lo = fit_one(tt, vv, FitModel::LogOnly);
            if (lo.rms_residual < best.rms_residual) best = lo;
        }
        if (best.rms_residual > 0.01) {
            DecayFit pl = fit_one(tt, vv, FitModel::PowerTimesLog);
            if (pl.rms_residual < best.rms_residual) best = pl;
        }
        out = best;
    } else {
        if (model == FitModel::LogOnly && !log_ok) throw Error(Code::Domain, "log-only model requires t > 1");
        out = fit_one(tt, vv, model);
    }
    out.window = window;
    return out;
}

std::vector<double> log_times(double t_lo, double t_hi, int per_decade)
{
    if (!(t_lo > 0.0 && t_hi > t_lo) || per_decade < 1) throw Error(Code::InvalidArgument, "bad time range");
    int m = static_cast<int>(std::lround(std::log10(t_hi / t_lo) * per_decade));
    std::vector<double> out;
    for (int i = 0; i <= m; ++i) out.push_back(t_lo * std::pow(10.0, static_cast<double>(i) / per_decade));
    out.back() = t_hi;
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw Error(Code::InsufficientData, "need at least 2 points");
    double mx = 0, my = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw Error(Code::NonPositiveValues, "log-log slope needs positive data");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= m;
    my /= m;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double a = std::log(x[i]) - mx, b = std::log(y[i]) - my;
        sxy += a * b;
        sxx += a * a;
    }
    return sxy / sxx;
}

// ---- experiments -------------------------------------------------------

std::vector<double> profile_experiment(const RadialData& data, const ModelParams& p, const std::vector<double>& times)
{
    if (data.mass == 0.0) throw Error(Code::ZeroMass, "optimal bounds need |P| > 0");
    for (double t : times)
        if (t < 1e2 * (1 - 1e-12) || t > 1e4 * (1 + 1e-12))
            throw Error(Code::InvalidArgument, "profile times must lie in [1e2, 1e4]");
    auto norms = radial_linear_norms(data, p, 0.0, times);
    std::vector<double> out;
    for (std::size_t i = 0; i < times.size(); ++i)
        out.push_back(norms[i] / (rate_D(data.n, times[i]) * std::fabs(data.mass)));
    return out;
}

std::vector<double> approx_relation_experiment(const RadialData& data, const ModelParams& p,
                                               const std::vector<double>& times)
{
    if (data.mass == 0.0) throw Error(Code::ZeroMass, "approximate relation check needs |P| > 0");
    std::vector<double> out;
    for (double t : times)
        out.push_back(radial_norm(data, p, t, 0.0, [&](double r) {
            return mode_propagator(t, r, p)[0][2] - p.tau * visco_kernel(t, r, p.beta).V1;
        }));
    return out;
}

SingularLimitParams SingularLimitParams::defaults(double beta)
{
    SingularLimitParams s;
    s.k = 41.0 / (40.0 * beta);
    s.k_tilde = 41.0 / (40.0 * beta);
    return s;
}

void check_energy_window(const SingularLimitParams& s, const ModelParams& p)
{
    double b = p.beta, t = p.tau;
    if (!(s.eps1 > 0.0 && s.eps1 <= (2.0 * b - 2.0 * t) / (b + t)))
        throw Error(Code::ParameterWindowViolation, "eps1 must lie in (0, (2beta-2tau)/(beta+tau)]");
    if (!(s.k >= (2.0 + s.eps1) / (2.0 * b) && s.k <= (2.0 - s.eps1) / (2.0 * t)))
        throw Error(Code::ParameterWindowViolation, "k must lie in [(2+eps1)/(2beta), (2-eps1)/(2tau)]");
}

void check_solution_window(const SingularLimitParams& s, const ModelParams& p, int n)
{
    double b = p.beta, t = p.tau, e2 = s.eps2;
    if (!(e2 > 0.0 && e2 < 2.0)) throw Error(Code::ParameterWindowViolation, "eps2 must lie in (0,2)");
    if (!(s.k_tilde >= (2.0 + e2) / (2.0 * b) && s.k_tilde <= (2.0 - e2) / (2.0 * t)))
        throw Error(Code::ParameterWindowViolation, "k~ must lie in [(2+eps2)/(2beta), (2-eps2)/(2tau)]");
    double cap = std::min({(n - 2.0) / n, 1.0 / (4.0 * t), e2 / (2.0 + e2), (2.0 * e2 - e2 * e2) / (4.0 * t)});
    if (!(s.eps3 > 0.0 && s.eps3 < cap)) throw Error(Code::ParameterWindowViolation, "eps3 outside its window");
}

double energy_singular(const SpectralField& w, const ModelParams& p, const SingularLimitParams& slp)
{
    check_energy_window(slp, p);
    const Grid& g = w.grid;
    double b = p.beta, t = p.tau, k = slp.k;
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double r2 = g.radius(i) * g.radius(i);
        e += b * r2 * std::norm(w.ut_hat[i] + w.u_hat[i] / b);
        e += t * std::norm(w.utt_hat[i] + k * w.ut_hat[i]);
        e += k * (1.0 - t * k) * std::norm(w.ut_hat[i]);
        e += (k - 1.0 / b) * r2 * std::norm(w.u_hat[i]);
    }
    return e * g.cell_volume() / static_cast<double>(g.size());
}

SpectralField difference_field(const SpectralField& u, const SpectralField& v)
{
    SpectralField w = u;
    for (std::size_t i = 0; i < w.u_hat.size(); ++i) {
        w.u_hat[i] -= v.u_hat[i];
        w.ut_hat[i] -= v.ut_hat[i];
        w.utt_hat[i] -= v.utt_hat[i];
    }
    return w;
}

namespace {

// Identically zero series (zero data) have no slope.
double sweep_slope(const std::vector<double>& taus, const std::vector<double>& vals)
{
    if (std::all_of(vals.begin(), vals.end(), [](double v) { return v == 0.0; }))
        return std::numeric_limits<double>::quiet_NaN();
    return loglog_slope(taus, vals);
}

SpectralField prepare_base(const Grid& grid, const InitialData& data, double beta, bool prepared)
{
    SpectralField base = make_field(grid, data.u0, data.u1, data.u2);
    if (prepared) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double r2 = grid.radius(i) * grid.radius(i);
            base.utt_hat[i] = -r2 * (base.u_hat[i] + beta * base.ut_hat[i]);
        }
    }
    return base;
}

// Time integral of the dissipation terms on panels graded into the initial layer.
double dissipation_integral(const SpectralField& base, const ModelParams& p, const SingularLimitParams& s, double T)
{
    std::vector<double> cuts{0.0};
    for (double c = p.tau / 16.0; c < T; c *= 2.0) cuts.push_back(c);
    while (cuts.back() < T) cuts.push_back(std::min(T, cuts.back() + 0.125));
    double a1 = 2.0 - s.eps1 - 2.0 * p.tau * s.k, a2 = 2.0 * p.beta * s.k - s.eps1 - 2.0;
    const Grid& g = base.grid;
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        double m = 0.5 * (cuts[j] + cuts[j + 1]), h = 0.5 * (cuts[j + 1] - cuts[j]);
        for (int i = 0; i < 8; ++i) {
            double t = m + h * kGLx[i];
            auto w = difference_field(linear_evolve(base, p, t), visco_evolve(base, p.beta, t));
            double wtt = field_l2(g, w.utt_hat), gwt = field_hs(g, w.ut_hat, 1.0);
            acc += h * kGLw[i] * (a1 * wtt * wtt + a2 * gwt * gwt);
        }
    }
    return acc;
}

}  // namespace

SweepResult singular_limit_sweep(const Grid& grid, const InitialData& data, double beta,
                                 const std::vector<double>& tau_list, double T, bool prepared,
                                 const std::optional<SingularLimitParams>& slp_in, int jobs)
{
    bool short_span = check_tau_list(tau_list, beta);
    SingularLimitParams slp = slp_in ? *slp_in : SingularLimitParams::defaults(beta);
    for (double tau : tau_list) check_energy_window(slp, {tau, beta});
    SpectralField base = prepare_base(grid, data, beta, prepared);
    SpectralField v = visco_evolve(base, beta, T);
    SweepResult out;
    out.short_span = short_span;
    out.points.resize(tau_list.size());
    run_jobs(tau_list.size(), jobs, [&](std::size_t i) {
        ModelParams p{tau_list[i], beta};
        auto w = difference_field(linear_evolve(base, p, T), v);
        out.points[i] = {p.tau, energy_singular(w, p, slp), dissipation_integral(base, p, slp, T)};
    });
    std::vector<double> taus, es, full;
    for (const auto& pt : out.points) {
        taus.push_back(pt.tau);
        es.push_back(pt.value);
        full.push_back(pt.value + pt.dissipation);
    }
    out.slope = sweep_slope(taus, es);
    out.dissipation_slope = sweep_slope(taus, full);
    return out;
}

SweepResult solution_limit_sweep(const Grid& grid, const InitialData& data, double beta,
                                 const std::vector<double>& tau_list, double T, int jobs)
{
    if (grid.dim() < 3)
        throw Error(Code::DimensionTooLow, "solution-limit slope needs n >= 3; n = 1, 2 only admit the t^2 bound");
    bool short_span = check_tau_list(tau_list, beta);
    SpectralField base = prepare_base(grid, data, beta, false);
    SweepResult out;
    out.short_span = short_span;
    {
        auto u2 = grid.backward(base.utt_hat);
        double all = 0.0, outer = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            auto x = grid.position(i);
            double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            double c = r2 * u2[i] * u2[i];
            all += c;
            if (std::sqrt(r2) > 0.4 * grid.length()) outer += c;
        }
        out.precondition_warning = all > 0.0 && outer > 1e-6 * all;
    }
    SpectralField v = visco_evolve(base, beta, T);
    out.points.resize(tau_list.size());
    run_jobs(tau_list.size(), jobs, [&](std::size_t i) {
        ModelParams p{tau_list[i], beta};
        auto w = difference_field(linear_evolve(base, p, T), v);
        double n2 = field_l2(grid, w.u_hat);
        out.points[i] = {p.tau, n2 * n2, 0.0};
    });
    std::vector<double> taus, vals;
    for (const auto& pt : out.points) {
        taus.push_back(pt.tau);
        vals.push_back(pt.value);
    }
    out.slope = sweep_slope(taus, vals);
    return out;
}

SemilinearDecayResult semilinear_decay_experiment(const Grid& grid, const Sampler& u2, double eps,
                                                  const ModelParams& p, double s, double power, double T,
                                                  const std::vector<double>& sample_times, EvolveControls controls)
{
    int n = grid.dim();
    auto adm = global_existence_admissible(n, s, power);
    if (!adm.ok) throw Error(Code::InadmissibleTriple, adm.reason);
    Sampler scaled = [u2, eps](const std::array<double, 3>& x) { return eps * u2(x); };
    SpectralField f = make_field(grid, nullptr, nullptr, scaled);
    std::vector<double> times, l2, hs, w_l2, w_hs;
    double sup_l2 = 0.0, sup_hs = 0.0;
    controls.sample_times = sample_times;
    controls.on_sample = [&](const SpectralField& cur) {
        double a = field_l2(grid, cur.u_hat), b = field_hs(grid, cur.u_hat, s);
        double ga = rate_g_tilde(n, 0.0, cur.t), gb = rate_g_tilde(n, s, cur.t);
        times.push_back(cur.t);
        l2.push_back(a);
        hs.push_back(b);
        w_l2.push_back(a / ga);
        w_hs.push_back(b / gb);
        sup_l2 = std::max(sup_l2, a / ga);
        sup_hs = std::max(sup_hs, b / gb);
    };
    auto outcome = evolve_until(f, p, power, T, controls);
    return {std::move(outcome), times, l2, hs, w_l2, w_hs, sup_l2, sup_hs};
}

BlowupScan blowup_scan(const Grid& grid, const Sampler& u2, const ModelParams& p, double power, double T,
                       EvolveControls controls)
{
    SpectralField f = make_field(grid, nullptr, nullptr, u2);
    if (controls.sample_times.empty()) controls.sample_times = log_times(std::min(1.0, T / 10.0), T, 20);
    BlowupScan out{evolve_until(f, p, power, T, controls), false, false, ""};
    out.blowup = out.outcome.status == EvolveStatus::Blowup;
    if (out.blowup) {
        out.verdict = "blowup";
        return out;
    }
    const auto& h = out.outcome.history;
    bool mono = true;
    int count = 0;
    for (std::size_t i = 1; i < h.size(); ++i) {
        if (h[i].t < T / 10.0) continue;
        ++count;
        if (!(h[i].l2 > h[i - 1].l2)) mono = false;
    }
    out.monotone_final_decade = mono && count > 0;
    out.verdict = out.monotone_final_decade ? "monotone-growth" : "inconclusive";
    return out;
}

FpsCheck fps_check(const Grid& grid, const Sampler& u2, const ModelParams& p, double rho, double T, double margin)
{
    SpectralField f = make_field(grid, nullptr, nullptr, u2);
    SpectralField g = linear_evolve(f, p, T);
    FpsCheck out;
    out.R = rho + std::sqrt(p.beta / p.tau) * T * (1.0 + margin);
    out.outside = fps_outside_mass(g, {0.0, 0.0, 0.0}, out.R);
    out.total = fps_total_mass(g);
    out.ratio = out.total > 0.0 ? out.outside / out.total : 0.0;
    return out;
}

KernelCheck kernel_check(const std::vector<double>& taus, double beta, const std::vector<double>& radii,
                         const std::vector<double>& times, bool include_degenerate, double oracle_tol)
{
    KernelCheck out;
    std::vector<double> ts = times;
    std::sort(ts.begin(), ts.end());
    for (double tau : taus) {
        ModelParams p = validate_params(tau, beta);
        std::vector<double> rs = radii;
        if (include_degenerate) {
            auto dr = degenerate_radii(p);
            for (std::size_t i = 1; i < dr.size(); ++i) {
                double d = root_threshold(dr[i], p);
                for (double f : {-10.0, -1.0, 0.0, 1.0, 10.0}) rs.push_back(dr[i] + f * d);
            }
        }
        for (double r : rs) {
            std::vector<double> row_t;
            for (double t : ts)
                if (t != 0.0 || ts.front() == 0.0) row_t.push_back(t);
            std::vector<double> row_err(row_t.size(), 0.0);
            for (int m = 0; m < 3; ++m) {
                std::array<double, 3> init{0.0, 0.0, 0.0};
                init[m] = 1.0;
                auto tr = integrate_mode(p, r, init, ts.back(), oracle_tol, ts);
                std::array<double, 3> sup{0, 0, 0};
                std::vector<std::array<double, 3>> err;
                for (std::size_t k = 0; k < tr.times.size(); ++k) {
                    if (tr.times[k] == 0.0 && ts.front() != 0.0) continue;
                    auto kv = kernel_values(tr.times[k], r, p);
                    std::array<double, 3> e{};
                    for (int d = 0; d < 3; ++d) {
                        sup[d] = std::max(sup[d], std::fabs(tr.states[k][d]));
                        e[d] = std::fabs(tr.states[k][d] - kv(m, d));
                    }
                    err.push_back(e);
                }
                for (std::size_t k = 0; k < err.size(); ++k) {
                    double rel = 0.0;
                    for (int d = 0; d < 3; ++d) rel = std::max(rel, sup[d] > 0.0 ? err[k][d] / sup[d] : err[k][d]);
                    row_err[k] = std::max(row_err[k], rel);
                    out.max_rel_err = std::max(out.max_rel_err, rel);
                    ++out.samples;
                }
            }
            for (std::size_t k = 0; k < row_err.size(); ++k) out.rows.push_back({row_t[k], tau, r, row_err[k]});
        }
    }
    return out;
}

RootInvariants root_invariants(int samples, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    RootInvariants out;
    for (int s = 0; s < samples; ++s) {
        double r = std::pow(10.0, -3.0 + 6.0 * u01(rng));
        double beta = std::pow(10.0, -1.0 + 2.0 * u01(rng));
        double frac = u01(rng);
        while (frac <= 0.0) frac = u01(rng);
        ModelParams p{beta * frac, beta};
        auto tr = char_roots(r, p);
        const auto& l = tr.roots;
        double e1 = 1.0 / p.tau, e2 = beta * r * r / p.tau, e3 = r * r / p.tau;
        cplx s1 = l[0] + l[1] + l[2], s2 = l[0] * l[1] + l[0] * l[2] + l[1] * l[2], s3 = l[0] * l[1] * l[2];
        double sc1 = std::max(e1, std::abs(l[0]) + std::abs(l[1]) + std::abs(l[2]));
        double sc2 = std::max(e2, std::abs(l[0] * l[1]) + std::abs(l[0] * l[2]) + std::abs(l[1] * l[2]));
        double sc3 = std::max(e3, std::abs(s3));
        out.vieta_max = std::max({out.vieta_max, std::abs(s1 + e1) / sc1, std::abs(s2 - e2) / sc2,
                                  std::abs(s3 + e3) / sc3});
        for (const auto& z : l) out.max_real_part = std::max(out.max_real_part, z.real());
        ++out.samples;
        if (tr.degenerate) {
            ++out.degenerate_skipped;
            continue;
        }
        for (int m = 0; m < 3; ++m) {
            cplx sum = 0.0;
            double mag = 0.0;
            for (int j = 0; j < 3; ++j) {
                cplx term = std::pow(l[j], m) / ((l[j] - l[(j + 1) % 3]) * (l[j] - l[(j + 2) % 3]));
                sum += term;
                mag += std::abs(term);
            }
            double expect = m == 2 ? 1.0 : 0.0;
            out.partial_fraction_max = std::max(out.partial_fraction_max, std::abs(sum - expect) / std::max(1.0, mag));
        }
    }
    return out;
}

// ---- named data profiles -----------------------------------------------

Sampler gaussian_profile(std::array<double, 3> c, double width, double amplitude, int n)
{
    return [=](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        return amplitude * std::exp(-r2 / (width * width));
    };
}

Sampler bump_profile(std::array<double, 3> c, double radius, double amplitude, int n)
{
    return [=](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        double q = r2 / (radius * radius);
        if (q >= 1.0) return 0.0;
        return amplitude * std::exp(1.0 - 1.0 / (1.0 - q));
    };
}

Sampler odd_gaussian_profile(std::array<double, 3> c, double width, double amplitude, int n)
{
    return [=](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        return amplitude * (x[0] - c[0]) * std::exp(-r2 / (width * width));
    };
}

}  // namespace mgt
