// Acceptance runner: one PASS/FAIL line per criterion. Arguments select criteria by number.
#include "mgt/analysis_lab.hpp"
#include "mgt/cli_runner.hpp"
#include "mgt/field_solver.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace mgt;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string num(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

// Runs a preset through the same path as the command-line tool and returns its summary.
json run(const std::string& cfg)
{
    auto r = run_experiment(parse_config_text(cfg));
    return json::parse(r.summary_json);
}

Verdict kernel()
{
    auto s = run("preset = kernel-check\ntaus = 0.1, 0.5, 0.9\nbeta = 1\nt_lo = 0.1\nt_hi = 10\nper_decade = 1\n");
    double e = s["metrics"]["max_rel_err"];
    return {e <= 1e-8, "max rel err " + num(e) + " over " + s["metrics"]["samples"].dump() + " samples (<= 1e-8)"};
}

Verdict invariants()
{
    auto s = run("preset = roots\nsamples = 10000\n");
    double v = s["metrics"]["vieta_max"], pf = s["metrics"]["partial_fraction_max"], re = s["metrics"]["max_real_part"];
    return {v <= 1e-12 && pf <= 1e-12 && re < 0.0,
            "vieta " + num(v) + ", partial fractions " + num(pf) + " (<= 1e-12), max Re " + num(re) + " (< 0)"};
}

Verdict rates()
{
    auto fit_of = [](int n) { return run("preset = linear-decay\nn = " + std::to_string(n) + "\n")["metrics"]["fit"]; };
    auto f1 = fit_of(1), f3 = fit_of(3), f2 = fit_of(2);
    double a1 = f1["exponent_t"], a3 = f3["exponent_t"], b2 = f2["exponent_log"];
    bool ok1 = f1["model"] == "pure-power" && std::fabs(a1 - 0.5) <= 0.05;
    bool ok3 = f3["model"] == "pure-power" && std::fabs(a3 + 0.25) <= 0.05;
    bool ok2 = f2["model"] == "log-only" && std::fabs(b2 - 0.5) <= 0.1;
    return {ok1 && ok2 && ok3, "n=1 exponent " + num(a1) + (ok1 ? " ok" : " FAIL") + "; n=3 exponent " + num(a3) +
                                   (ok3 ? " ok" : " FAIL") + "; n=2 model " + f2["model"].get<std::string>() +
                                   " exponent_log " + num(b2) + (ok2 ? " ok" : " FAIL") + " (0.5 +- 0.1)"};
}

Verdict optimality()
{
    bool ok = true;
    std::string d;
    for (int n = 1; n <= 3; ++n) {
        double band = run("preset = profile\nn = " + std::to_string(n) + "\n")["metrics"]["band_factor"];
        ok = ok && band < 2.0;
        d += "n=" + std::to_string(n) + " band " + num(band) + (n < 3 ? "; " : " (< 2)");
    }
    return {ok, d};
}

Verdict approx()
{
    auto s1 = run("preset = approx-relation\nn = 1\n");
    auto s2 = run("preset = approx-relation\nn = 2\n");
    double a1 = s1["metrics"]["difference_fit"]["exponent_t"];
    double a2 = s2["metrics"]["difference_fit"]["exponent_t"];
    double u2 = s2["metrics"]["solution_fit"]["exponent_t"];
    bool ok1 = std::fabs(a1 - 0.25) <= 0.05, ok2 = a2 <= 0.05 && u2 > 0.0;
    return {ok1 && ok2, "n=1 difference exponent " + num(a1) + " (0.25 +- 0.05); n=2 difference exponent " + num(a2) +
                            " (<= 0.05), solution exponent " + num(u2) + " (> 0)"};
}

Verdict singular()
{
    auto g = run("preset = singular-limit\njobs = 4\n");
    auto p = run("preset = singular-limit\nprepared = true\njobs = 4\n");
    double sg = g["metrics"]["slope"], sp = p["metrics"]["slope"];
    bool okg = std::fabs(sg - 1.0) <= 0.15, okp = std::fabs(sp - 2.0) <= 0.15;
    return {okg && okp, "generic slope " + num(sg) + " (1 +- 0.15)" + (okg ? "" : " FAIL") + "; prepared slope " +
                            num(sp) + " (2 +- 0.15)" + (okp ? "" : " FAIL") + "; E+D slopes " +
                            num(g["metrics"]["energy_plus_dissipation_slope"]) + ", " +
                            num(p["metrics"]["energy_plus_dissipation_slope"])};
}

Verdict solution()
{
    auto s = run("preset = solution-limit\njobs = 4\n");
    double sl = s["metrics"]["slope"];
    return {std::fabs(sl - 2.0) <= 0.2, "slope " + num(sl) + " (2 +- 0.2)"};
}

Verdict semilinear()
{
    auto s = run("preset = semilinear-decay\n");
    const auto& m = s["metrics"];
    bool done = m["status"] == "completed";
    bool finite = m["sup_weighted_l2"].is_number() && m["sup_weighted_hs"].is_number();
    double d1 = m["drift_l2_after_10"].is_number() ? m["drift_l2_after_10"].get<double>() : INFINITY;
    double d2 = m["drift_hs_after_10"].is_number() ? m["drift_hs_after_10"].get<double>() : INFINITY;
    bool ok = done && finite && d1 <= 0.2 && d2 <= 0.2;
    return {ok, std::string("run ") + m["status"].get<std::string>() + ", sups " + m["sup_weighted_l2"].dump() + ", " +
                    m["sup_weighted_hs"].dump() + ", drift after t=10 " + num(d1) + ", " + num(d2) + " (<= 0.2)"};
}

Verdict blowup()
{
    auto big = run("preset = blowup-scan\namplitude = 1\n");
    auto small = run("preset = blowup-scan\namplitude = 1e-4\n");
    bool ok_big = big["metrics"]["status"] == "blowup" && big["metrics"]["bracket"].is_array();
    std::string c = small["metrics"]["case"];
    bool ok_small = c == "blowup" || c == "monotone-growth";
    return {ok_big && ok_small, "amplitude 1: " + big["metrics"]["case"].get<std::string>() + " bracket " +
                                    big["metrics"]["bracket"].dump() + "; amplitude 1e-4: " + c + " at t " +
                                    num(small["metrics"]["final_t"])};
}

Verdict fps()
{
    auto s = run("preset = fps-check\nrho = 1\ntau = 0.5\nbeta = 1\nT = 5\nL = 32\n");
    double r = s["metrics"]["ratio"];
    return {r < 1e-8, "outside/total " + num(r) + " at R " + num(s["metrics"]["R"]) + " (< 1e-8)"};
}

Verdict convergence()
{
    ModelParams p{0.5, 1.0};
    Grid g(1, 16.0, 128);
    auto gauss = gaussian_profile({0, 0, 0}, 1.0, 1.0, 1);
    auto f0 = make_field(g, gauss, nullptr, gauss);
    auto u = [&](int steps) { return g.backward(evolve_fixed(f0, p, 2.0, 1.0, steps).u_hat); };
    auto diff = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    };
    auto u1 = u(20), u2 = u(40), u3 = u(80), u4 = u(160);
    double o1 = std::log2(diff(u1, u2) / diff(u2, u3)), o2 = std::log2(diff(u2, u3) / diff(u3, u4));
    double order = std::min(o1, o2);
    return {order >= 1.8, "observed orders " + num(o1) + ", " + num(o2) + " (>= 1.8)"};
}

struct Criterion {
    int id;
    double limit_s;
    std::function<Verdict()> body;
};

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> all = {
        {1, 10, kernel},       {2, 5, invariants}, {3, 120, rates},       {4, 120, optimality},
        {5, 120, approx},      {6, 180, singular}, {7, 300, solution},    {8, 600, semilinear},
        {9, 600, blowup},      {10, 60, fps},      {11, 60, convergence},
    };
    std::vector<int> pick;
    for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
    bool all_ok = true;
    for (const auto& c : all) {
        if (!pick.empty() && std::find(pick.begin(), pick.end(), c.id) == pick.end()) continue;
        auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.body();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs < c.limit_s;
        bool ok = v.pass && in_time;
        all_ok = all_ok && ok;
        std::printf("criterion %d: %s %s; runtime %.1f s (limit %.0f s)%s\n", c.id, ok ? "PASS" : "FAIL",
                    v.detail.c_str(), secs, c.limit_s, in_time ? "" : " EXCEEDED");
        std::fflush(stdout);
    }
    return all_ok ? 0 : 1;
}
