#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mgt/analysis_lab.hpp"
#include "mgt/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mgt;

namespace {

Code code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Code::Ok;
}

std::vector<double> sample(const std::vector<double>& t, const std::function<double(double)>& f)
{
    std::vector<double> v;
    for (double x : t) v.push_back(f(x));
    return v;
}

}  // namespace

TEST_CASE("norms of simple fields")
{
    Grid g(1, 40.0, 256);
    auto f = make_field(g, gaussian_profile({0, 0, 0}, 1.0, 1.0, 1), nullptr, nullptr);
    CHECK(norm_L2(f) == doctest::Approx(std::pow(std::numbers::pi / 2, 0.25)).epsilon(1e-8));
    CHECK(norm_Hs_dot(f, 0.0) == norm_L2(f));
    CHECK(norm_Linf(f) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mass_P(f) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-8));
    // int (1+|x|) e^{-x^2} dx = sqrt(pi) + 1; the kink at 0 limits the rectangle rule
    Grid fine(1, 40.0, 2048);
    auto ff = make_field(fine, gaussian_profile({0, 0, 0}, 1.0, 1.0, 1), nullptr, nullptr);
    CHECK(norm_L1_weighted(ff) == doctest::Approx(std::sqrt(std::numbers::pi) + 1.0).epsilon(1e-4));
    // |D| e^{-x^2}: int r^2 |f^|^2 dr / 2pi = int |f'|^2 = sqrt(pi/2)
    CHECK(norm_Hs_dot(f, 1.0) == doctest::Approx(std::pow(std::numbers::pi / 2, 0.25)).epsilon(1e-8));
    CHECK(code_of([&] { norm_Hs_dot(f, 2.5); }) == Code::OutOfRange);
    auto odd = make_field(g, odd_gaussian_profile({0, 0, 0}, 1.0, 1.0, 1), nullptr, nullptr);
    CHECK(std::fabs(mass_P(odd)) < 1e-12);
    CHECK(norm_L2(make_field(g, nullptr, nullptr, nullptr)) == 0.0);
}

TEST_CASE("Parseval on random fields")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    Grid g(2, 6.0, 16);
    std::vector<double> x(g.size());
    for (auto& v : x) v = nd(rng);
    SpectralField f(g);
    f.u_hat = g.forward(x);
    double phys = 0.0;
    for (double v : x) phys += v * v;
    CHECK(norm_L2(f) == doctest::Approx(std::sqrt(phys * g.cell_volume())).epsilon(1e-10));
}

TEST_CASE("radial quadrature reproduces Gaussian integrals")
{
    for (int n : {1, 2, 3, 5}) {
        auto rule = radial_rule(n, 40.0, 0.25);
        for (double w : rule.w) REQUIRE(w > 0.0);
        // (2pi)^{-n} int_{R^n} e^{-|xi|^2} dxi = (4 pi)^{-n/2}
        double q = 0.0;
        for (std::size_t i = 0; i < rule.r.size(); ++i) q += rule.w[i] * std::exp(-rule.r[i] * rule.r[i]);
        CHECK(q == doctest::Approx(std::pow(4 * std::numbers::pi, -n / 2.0)).epsilon(1e-10));
    }
    CHECK(sphere_area(3) == doctest::Approx(4 * std::numbers::pi));
    CHECK(sphere_area(1) == doctest::Approx(2.0));
}

TEST_CASE("radial norms agree with the box solver")
{
    ModelParams p{0.5, 1.0};
    for (int n = 1; n <= 3; ++n) {
        auto data = gaussian_radial(n, 1.0, 1.0);
        double T = 2.0;
        Grid g(n, n == 1 ? 40.0 : 24.0, n == 3 ? 64 : 128);
        auto f = linear_evolve(make_field(g, nullptr, nullptr, gaussian_profile({0, 0, 0}, 1.0, 1.0, n)), p, T);
        auto rad = radial_linear_norms(data, p, 0.0, {0.0, T});
        CHECK(rad[0] == 0.0);
        CHECK(rad[1] == doctest::Approx(norm_L2(f)).epsilon(1e-4));
        CHECK(radial_linear_norms(data, p, 1.0, {T})[0] == doctest::Approx(norm_Hs_dot(f, 1.0)).epsilon(1e-4));
    }
}

TEST_CASE("one-dimensional norm grows like sqrt(t)")
{
    auto t = log_times(1e2, 1e4, 10);
    auto v = radial_linear_norms(gaussian_radial(1, 1.0, 1.0), {0.5, 1.0}, 0.0, t);
    auto fit = fit_decay(t, v, {1e2, 1e4}, FitModel::PurePower);
    CHECK(fit.exponent_t == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("decay fits on exact series")
{
    auto t = log_times(1e2, 1e4, 20);
    auto pw = fit_decay(t, sample(t, [](double x) { return std::pow(x, -0.75); }), {1e2, 1e4}, FitModel::PurePower);
    CHECK(std::fabs(pw.exponent_t + 0.75) < 1e-10);
    CHECK(pw.rms_residual < 1e-10);
    auto lg = fit_decay(t, sample(t, [](double x) { return std::sqrt(std::log(x)); }), {1e2, 1e4}, FitModel::Auto);
    CHECK(lg.model == FitModel::LogOnly);
    CHECK(std::fabs(lg.exponent_log - 0.5) < 1e-6);
    auto au = fit_decay(t, sample(t, [](double x) { return 3.0 * std::pow(x, -0.75); }), {1e2, 1e4}, FitModel::Auto);
    CHECK(au.model == FitModel::PurePower);
    auto ptl = fit_decay(t, sample(t, [](double x) { return std::pow(1 + x, 0.3) * std::pow(std::log(std::exp(1.0) + x), 0.7); }),
                         {1e2, 1e4}, FitModel::PowerTimesLog);
    CHECK(ptl.exponent_t == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(ptl.exponent_log == doctest::Approx(0.7).epsilon(1e-8));
}

TEST_CASE("decay fits are scale invariant")
{
    auto t = log_times(1e2, 1e4, 20);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.9, 1.1);
    std::vector<double> v, w;
    for (double x : t) {
        v.push_back(std::pow(x, 0.4) * u(rng));
        w.push_back(v.back() * 1234.5);
    }
    for (auto m : {FitModel::PurePower, FitModel::LogOnly, FitModel::PowerTimesLog, FitModel::Auto}) {
        auto a = fit_decay(t, v, {1e2, 1e4}, m), b = fit_decay(t, w, {1e2, 1e4}, m);
        CHECK(a.model == b.model);
        CHECK(a.exponent_t == doctest::Approx(b.exponent_t).epsilon(1e-9));
        CHECK(a.exponent_log == doctest::Approx(b.exponent_log).epsilon(1e-9));
    }
}

TEST_CASE("decay fit errors")
{
    auto t = log_times(1, 10, 4);
    auto v = sample(t, [](double x) { return x; });
    CHECK(code_of([&] { fit_decay(t, v, {1, 10}, FitModel::PurePower); }) == Code::InsufficientData);
    auto t2 = log_times(1e2, 1e3, 20);
    auto v2 = sample(t2, [](double x) { return x; });
    v2[3] = 0.0;
    CHECK(code_of([&] { fit_decay(t2, v2, {1e2, 1e3}, FitModel::PurePower); }) == Code::NonPositiveValues);
    CHECK(code_of([&] { fit_decay(t2, v2, {1e3, 1e2}, FitModel::PurePower); }) == Code::InvalidArgument);
}

TEST_CASE("profile experiment")
{
    ModelParams p{0.5, 1.0};
    auto t = log_times(1e2, 1e4, 10);
    for (int n = 1; n <= 3; ++n) {
        auto r = profile_experiment(gaussian_radial(n, 1.0, 1.0), p, t);
        double lo = *std::min_element(r.begin(), r.end()), hi = *std::max_element(r.begin(), r.end());
        CHECK(lo > 0.0);
        CHECK(hi / lo < 2.0);
    }
    auto zero = gaussian_radial(1, 1.0, 0.0);
    CHECK(code_of([&] { profile_experiment(zero, p, t); }) == Code::ZeroMass);
    CHECK(code_of([&] { profile_experiment(gaussian_radial(1, 1.0, 1.0), p, {10.0}); }) == Code::InvalidArgument);
}

TEST_CASE("approximate relation as tau shrinks")
{
    // Data enter through u_tt, so u itself is O(tau) and the difference is one order smaller.
    auto data = gaussian_radial(1, 1.0, 1.0);
    std::vector<double> t{1e2, 1e3};
    std::vector<double> scaled;
    for (double tau : {1e-2, 1e-3, 1e-4}) {
        ModelParams p{tau, 1.0};
        auto d = approx_relation_experiment(data, p, t);
        auto u = radial_linear_norms(data, p, 0.0, t);
        for (std::size_t i = 0; i < t.size(); ++i) CHECK(d[i] < tau * u[i]);
        scaled.push_back(u[1] / tau);
    }
    CHECK(scaled[2] == doctest::Approx(scaled[1]).epsilon(1e-3));
    ModelParams p{0.5, 1.0};
    CHECK(code_of([&] { approx_relation_experiment(gaussian_radial(1, 1.0, 0.0), p, t); }) == Code::ZeroMass);
}

TEST_CASE("singular-limit energy")
{
    ModelParams p{0.1, 1.0};
    auto slp = SingularLimitParams::defaults(1.0);
    CHECK(slp.k == doctest::Approx(41.0 / 40.0));
    Grid g(1, 20.0, 64);
    auto data = make_field(g, gaussian_profile({0, 0, 0}, 1.0, 1.0, 1), gaussian_profile({0, 0, 0}, 1.5, 0.5, 1),
                           gaussian_profile({0, 0, 0}, 0.8, 0.7, 1));
    // w = w_t = 0 and w_tt = u2 - Lap u0 - beta Lap u1 at t = 0
    SpectralField w(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double r2 = g.radius(i) * g.radius(i);
        w.utt_hat[i] = data.utt_hat[i] + r2 * (data.u_hat[i] + p.beta * data.ut_hat[i]);
    }
    SpectralField only(g);
    only.u_hat = w.utt_hat;
    double X = norm_L2(only);
    CHECK(energy_singular(w, p, slp) == doctest::Approx(p.tau * X * X).epsilon(1e-12));
    CHECK(energy_singular(SpectralField(g), p, slp) == 0.0);

    auto edge = slp;
    edge.k = 1.0 / p.beta + 0.5 * slp.eps1;  // (2+eps1)/(2 beta)
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        SpectralField r(g);
        std::vector<double> a(g.size()), b(g.size()), c(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) a[i] = nd(rng), b[i] = nd(rng), c[i] = nd(rng);
        r.u_hat = g.forward(a), r.ut_hat = g.forward(b), r.utt_hat = g.forward(c);
        CHECK(energy_singular(r, p, slp) >= 0.0);
        CHECK(energy_singular(r, p, edge) >= 0.0);
    }
    auto bad = slp;
    bad.k = 0.5;
    CHECK(code_of([&] { energy_singular(w, p, bad); }) == Code::ParameterWindowViolation);
    bad.k = 25.0;
    CHECK(code_of([&] { energy_singular(w, p, bad); }) == Code::ParameterWindowViolation);
    bad = slp;
    bad.eps1 = 2.0;
    CHECK(code_of([&] { check_energy_window(bad, p); }) == Code::ParameterWindowViolation);
    CHECK_NOTHROW(check_solution_window(slp, p, 3));
}

TEST_CASE("sweeps with zero data and bad tau lists")
{
    Grid g(1, 16.0, 32);
    InitialData zero{nullptr, nullptr, nullptr};
    std::vector<double> taus{1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    auto r = singular_limit_sweep(g, zero, 1.0, taus, 0.5, false);
    for (const auto& pt : r.points) CHECK(pt.value == 0.0);
    CHECK(std::isnan(r.slope));
    CHECK(r.short_span);
    CHECK(code_of([&] { singular_limit_sweep(g, zero, 1.0, {0.1, 0.05, 0.02}, 0.5, false); }) == Code::InvalidArgument);
    CHECK(code_of([&] { singular_limit_sweep(g, zero, 1.0, {0.5, 0.4, 0.3, 0.2}, 0.5, false); }) == Code::InvalidArgument);
    CHECK(code_of([&] { singular_limit_sweep(g, zero, 1.0, {1.5, 0.1, 0.01, 0.001}, 0.5, false); }) == Code::InvalidArgument);
    CHECK(code_of([&] { solution_limit_sweep(g, zero, 1.0, taus, 0.5); }) == Code::DimensionTooLow);
    Grid g3(3, 8.0, 16);
    auto s = solution_limit_sweep(g3, zero, 1.0, taus, 0.5);
    for (const auto& pt : s.points) CHECK(pt.value == 0.0);
}

TEST_CASE("sweep results do not depend on the job count")
{
    Grid g(1, 32.0, 64);
    InitialData d{gaussian_profile({0, 0, 0}, 1.0, 1.0, 1), gaussian_profile({0, 0, 0}, 1.5, 0.5, 1),
                  gaussian_profile({0, 0, 0}, 0.8, 0.7, 1)};
    std::vector<double> taus{0.25, 0.1, 0.02, 0.005};
    auto a = singular_limit_sweep(g, d, 1.0, taus, 0.5, false, std::nullopt, 1);
    auto b = singular_limit_sweep(g, d, 1.0, taus, 0.5, false, std::nullopt, 4);
    CHECK_FALSE(a.short_span);
    for (std::size_t i = 0; i < taus.size(); ++i) CHECK(a.points[i].value == b.points[i].value);
}

TEST_CASE("slowly decaying data triggers the Hardy precondition warning")
{
    Grid g(3, 12.0, 16);
    InitialData d{nullptr, nullptr, [](const std::array<double, 3>& x) {
                      return 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
                  }};
    std::vector<double> taus{0.25, 0.1, 0.05, 0.02};
    CHECK(solution_limit_sweep(g, d, 1.0, taus, 0.2).precondition_warning);
    InitialData gd{nullptr, nullptr, gaussian_profile({0, 0, 0}, 1.0, 1.0, 3)};
    CHECK_FALSE(solution_limit_sweep(g, gd, 1.0, taus, 0.2).precondition_warning);
}

TEST_CASE("semilinear decay experiment")
{
    ModelParams p{0.5, 1.0};
    Grid g(3, 12.0, 16);
    CHECK(code_of([&] { semilinear_decay_experiment(g, gaussian_profile({0, 0, 0}, 1, 1, 3), 1e-3, p, 1, 3, 1, {}); }) ==
          Code::Ok);
    Grid g2(2, 12.0, 16);
    CHECK(code_of([&] { semilinear_decay_experiment(g2, gaussian_profile({0, 0, 0}, 1, 1, 2), 1e-3, p, 1, 3, 1, {}); }) ==
          Code::InadmissibleTriple);
    auto z = semilinear_decay_experiment(g, gaussian_profile({0, 0, 0}, 1, 1, 3), 0.0, p, 1, 3, 2.0, {0.5, 1.0, 2.0});
    CHECK(z.sup_l2 == 0.0);
    CHECK(z.sup_hs == 0.0);
}

TEST_CASE("finite propagation speed experiment")
{
    auto r = fps_check(Grid(1, 32.0, 512), bump_profile({0, 0, 0}, 1.0, 1.0, 1), {0.5, 1.0}, 1.0, 5.0, 0.05);
    CHECK(r.R == doctest::Approx(1 + std::sqrt(2.0) * 5 * 1.05));
    CHECK(r.ratio < 1e-8);
    CHECK(r.total > 0.0);
}

TEST_CASE("kernel check and root invariants")
{
    auto k = kernel_check({0.5}, 1.0, {0.0, 1e-3, 1.0, 10.0}, {0.1, 1.0}, false);
    CHECK(k.max_rel_err < 1e-8);
    CHECK(k.rows.size() == 8);
    CHECK(k.samples == 3 * static_cast<int>(k.rows.size()));
    auto ri = root_invariants(500, 42);
    CHECK(ri.samples == 500);
    CHECK(ri.vieta_max < 1e-12);
    CHECK(ri.partial_fraction_max < 1e-12);
    CHECK(ri.max_real_part < 0.0);
    auto again = root_invariants(500, 42);
    CHECK(again.vieta_max == ri.vieta_max);
}

TEST_CASE("blow-up scan on small data")
{
    auto b = blowup_scan(Grid(1, 64.0, 128), gaussian_profile({0, 0, 0}, 1.0, 1.0, 1), {0.5, 1.0}, 2.0, 100.0);
    CHECK(b.blowup);
    CHECK(b.verdict == "blowup");
}
