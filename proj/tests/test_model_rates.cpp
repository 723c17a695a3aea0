#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mgt/error.hpp"
#include "mgt/model_rates.hpp"

#include <cmath>
#include <numbers>

using namespace mgt;

namespace {

Code code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Code::Ok;
}

}  // namespace

TEST_CASE("validate_params enforces the dissipative window")
{
    auto p = validate_params(0.5, 1.0);
    CHECK(p.tau == 0.5);
    CHECK(p.beta == 1.0);
    CHECK(code_of([] { validate_params(1.0, 1.0); }) == Code::ConservativeCase);
    CHECK(code_of([] { validate_params(0.0, 1.0); }) == Code::NonDissipative);
    CHECK(code_of([] { validate_params(2.0, 1.0); }) == Code::NonDissipative);
    CHECK(code_of([] { validate_params(0.5, -1.0); }) == Code::NonDissipative);
}

TEST_CASE("rate_D values")
{
    CHECK(rate_D(1, 4.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(rate_D(2, std::numbers::e) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rate_D(4, 16.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(code_of([] { rate_D(2, 1.0); }) == Code::Domain);
    CHECK(code_of([] { rate_D(0, 2.0); }) == Code::InvalidDimension);
}

TEST_CASE("rate_F values and branches")
{
    CHECK(rate_F(1, 1, 0, 3) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(rate_F(1, 2, 0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rate_F(1, 3, 0, 3) == doctest::Approx(std::pow(4.0, -0.25)).epsilon(1e-15));
    CHECK(code_of([] { rate_F(1, 1, 2.5, 1); }) == Code::OutOfRange);
    // 2sm+(2-m)n against 2m and 2+m, m = 1: q = 2s + n.
    CHECK(rate_F_branch(1, 1, 0) == 0);
    CHECK(rate_F_branch(1, 2, 0) == 1);
    CHECK(rate_F_branch(1, 1, 0.6) == 2);
    CHECK(rate_F_branch(1, 3, 0) == 3);
    // Tie 2sm + (2-m)n = 2m with non-integer inputs.
    CHECK(rate_F_branch(1.5, 3, 0.5) == 1);
    CHECK(rate_F_branch(1.2, 1, 2.0 / 3.0) == 1);
}

TEST_CASE("rate_F branch selection is exclusive over a lattice")
{
    for (double m : {1.0, 1.25, 1.5, 1.75})
        for (int n = 1; n <= 6; ++n)
            for (double s = 0.0; s <= 2.0; s += 0.125) {
                int b = rate_F_branch(m, n, s);
                double q = 2 * s * m + (2 - m) * n;
                int expect = q < 2 * m - 1e-12 ? 0 : (std::fabs(q - 2 * m) <= 1e-12 ? 1 : (q < 2 + m - 1e-12 ? 2 : 3));
                CHECK(b == expect);
            }
}

TEST_CASE("rate_g_tilde and rate_h values")
{
    CHECK(rate_g_tilde(2, 0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rate_g_tilde(3, 1, 3) == doctest::Approx(std::pow(4.0, -0.75)).epsilon(1e-15));
    CHECK(rate_g_tilde(2, 0.5, 9) == doctest::Approx(std::pow(10.0, -0.25)).epsilon(1e-15));
    CHECK(code_of([] { rate_g_tilde(1, 0, 1); }) == Code::InvalidDimension);
    CHECK(rate_h(0, 3) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(rate_h(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rate_h(2, 3) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(code_of([] { rate_h(-0.1, 1); }) == Code::OutOfRange);
}

TEST_CASE("continuity at s = 1, t = 0 and positivity")
{
    CHECK(rate_h(1.0 - 1e-12, 0) == doctest::Approx(rate_h(1.0, 0)));
    for (int n = 2; n <= 5; ++n) CHECK(rate_g_tilde(n, 1.0 - 1e-12, 0) == doctest::Approx(rate_g_tilde(n, 1.0, 0)));
    for (int n = 1; n <= 5; ++n)
        for (double s = 0; s <= 2; s += 0.25)
            for (double t : {0.0, 1.5, 1e3}) {
                double f = rate_F(1, n, s, t), h = rate_h(s, t);
                CHECK((std::isfinite(f) && f > 0));
                CHECK((std::isfinite(h) && h > 0));
            }
}

TEST_CASE("rate_F / rate_D tends to one for n >= 3")
{
    for (int n = 3; n <= 6; ++n)
        for (double t : {1e3, 1e4, 1e6}) {
            double ratio = rate_F(1, n, 0, t) / rate_D(n, t);
            CHECK(ratio >= 0.9);
            CHECK(ratio <= 1.1);
        }
}

TEST_CASE("global existence admissibility")
{
    CHECK(global_existence_admissible(3, 2, 3).ok);
    auto a = global_existence_admissible(2, 1, 4);
    CHECK_FALSE(a.ok);
    CHECK_FALSE(a.reason.empty());
    CHECK_FALSE(global_existence_admissible(7, 1, 2).ok);
    CHECK_FALSE(global_existence_admissible(2, 1, 4.01).ok);
    CHECK(global_existence_admissible(2, 2, 5.01).ok);
    CHECK_FALSE(global_existence_admissible(2, 2, 5).ok);
}

TEST_CASE("blow-up admissibility")
{
    CHECK(blowup_admissible(1, 100));
    CHECK(blowup_admissible(2, 3));
    CHECK_FALSE(blowup_admissible(3, 2.01));
    CHECK(code_of([] { blowup_admissible(1, 1.0); }) == Code::OutOfRange);
}

TEST_CASE("blow-up and global existence regimes are disjoint")
{
    for (int n = 2; n <= 6; ++n)
        for (double p = 1.05; p <= 8.0; p += 0.05)
            for (double s = 0.0; s <= 2.0; s += 0.125)
                CHECK_FALSE((blowup_admissible(n, p) && global_existence_admissible(n, s, p).ok));
}
