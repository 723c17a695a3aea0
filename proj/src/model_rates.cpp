#include "mgt/model_rates.hpp"

#include "mgt/error.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

namespace mgt {

namespace {

// Exact rational for branch comparisons.
struct Frac {
    __int128 num = 0;
    __int128 den = 1;

    Frac() = default;
    Frac(__int128 a, __int128 b = 1) : num(a), den(b) { norm(); }

    void norm()
    {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        __int128 a = num < 0 ? -num : num, b = den;
        while (b != 0) {
            __int128 r = a % b;
            a = b;
            b = r;
        }
        if (a > 1) {
            num /= a;
            den /= a;
        }
    }
};

Frac operator+(Frac a, Frac b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
Frac operator-(Frac a, Frac b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
Frac operator*(Frac a, Frac b) { return {a.num * b.num, a.den * b.den}; }
Frac operator/(Frac a, Frac b) { return {a.num * b.den, a.den * b.num}; }

int cmp(Frac a, Frac b)
{
    __int128 l = a.num * b.den, r = b.num * a.den;
    return l < r ? -1 : (l > r ? 1 : 0);
}

int cmp(double a, double b)
{
    double tol = 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)});
    if (std::fabs(a - b) <= tol) return 0;
    return a < b ? -1 : 1;
}

// Continued-fraction recovery, denominator at most 1000, exact to 1e-15.
std::optional<Frac> as_frac(double x)
{
    if (!std::isfinite(x) || std::fabs(x) > 1e9) return std::nullopt;
    double v = x;
    long long h0 = 1, h1 = 0, k0 = 0, k1 = 1;
    for (int it = 0; it < 40; ++it) {
        double a = std::floor(v);
        long long ai = static_cast<long long>(a);
        long long h2 = ai * h0 + h1, k2 = ai * k0 + k1;
        if (k2 > 1000) break;
        h1 = h0;
        h0 = h2;
        k1 = k0;
        k0 = k2;
        if (std::fabs(static_cast<double>(h0) / static_cast<double>(k0) - x) <= 1e-15 * std::max(1.0, std::fabs(x)))
            return Frac(h0, k0);
        double frac = v - a;
        if (frac == 0.0) break;
        v = 1.0 / frac;
    }
    return std::nullopt;
}

template <class T>
int f_branch(T m, T n, T s)
{
    T two(2);
    T q = two * s * m + (two - m) * n;
    int c1 = cmp(q, two * m);
    if (c1 < 0) return 0;
    if (c1 == 0) return 1;
    if (cmp(q, two + m) < 0) return 2;
    return 3;
}

std::string fmt(double x)
{
    std::ostringstream os;
    os << x;
    return os.str();
}

// Returns the first violated global-existence hypothesis, empty if none.
template <class T>
std::string ge_violation(int ni, T s, T p)
{
    T n(ni), zero(0), one(1), two(2), three(3), four(4), half = T(1) / T(2);
    if (ni < 2) return "dimension n must be at least 2";
    if (ni == 2) {
        if (cmp(s, half) < 0 || cmp(s, two) > 0) return "s must lie in [1/2,2] when n=2";
    } else {
        if (cmp(s, zero) <= 0 || cmp(s, two) > 0) return "s must lie in (0,2] when n>=3";
    }
    if (cmp(p, two) < 0) return "p must be at least 2";
    if (cmp(n, four * s) > 0) return "no global-existence result for n > 4s";
    if (cmp(s, n) < 0 && cmp(n, three * s) <= 0) {
        if (cmp(p, two * n / (n - s)) > 0) return "upper bound p <= 2n/(n-s) violated";
    } else if (cmp(three * s, n) < 0 && cmp(n, four * s) <= 0) {
        if (cmp(p, n / (n - two * s)) > 0) return "upper bound p <= n/(n-2s) violated";
    }
    bool s_low = cmp(s, one) < 0;
    if (ni == 2) {
        if (s_low) {
            if (cmp(p, T(5)) <= 0) return "lower bound p > 5 violated";
        } else if (cmp(p, s + three) <= 0) {
            return "lower bound p > s+3 violated";
        }
    } else if (ni <= 6) {
        if (s_low) {
            if (cmp(p, (n + three) / (n - one)) < 0) return "lower bound p >= (n+3)/(n-1) violated";
        } else if (cmp(p, (n + two) / (n - one)) <= 0) {
            return "lower bound p > (n+2)/(n-1) violated";
        }
    } else {
        T a = T(3) * n / two - one;
        if (s_low) {
            T b = n + three;
            T mx = cmp(a, b) >= 0 ? a : b;
            if (cmp(p, mx / (n - one)) < 0) return "lower bound p >= max{3n/2-1,n+3}/(n-1) violated";
        } else if (cmp(p, a / (n - one)) < 0) {
            return "lower bound p >= (3n/2-1)/(n-1) violated";
        }
    }
    return {};
}

double pow1p(double t, double a) { return std::pow(1.0 + t, a); }

void check_s(double s)
{
    if (!(s >= 0.0 && s <= 2.0)) throw Error(Code::OutOfRange, "s must lie in [0,2], got " + fmt(s));
}

}  // namespace

ModelParams validate_params(double tau, double beta)
{
    if (!(std::isfinite(tau) && std::isfinite(beta)) || tau <= 0.0 || beta <= 0.0)
        throw Error(Code::NonDissipative, "dissipative case requires 0 < tau < beta");
    if (tau == beta) throw Error(Code::ConservativeCase, "tau = beta is the conservative case");
    if (tau > beta) throw Error(Code::NonDissipative, "dissipative case requires 0 < tau < beta");
    return {tau, beta};
}

double RateSpec::operator()(double t) const
{
    if (pure_log_of_t) {
        if (!(t > 1.0)) throw Error(Code::Domain, "(ln t)^b law requires t > 1");
        return std::pow(std::log(t), power_log);
    }
    if (t < 0.0) throw Error(Code::Domain, "rate laws require t >= 0");
    double v = pow1p(t, power_t);
    if (power_log != 0.0) v *= std::pow(std::log(std::numbers::e + t), power_log);
    return v;
}

RateSpec rate_D_spec(int n)
{
    if (n < 1) throw Error(Code::InvalidDimension, "n must be at least 1");
    if (n == 2) return {0.0, 0.5, true};
    if (n == 1) return {0.5, 0.0, false};
    return {-(n - 2) / 4.0, 0.0, false};
}

double rate_D(int n, double t)
{
    if (n < 1) throw Error(Code::InvalidDimension, "n must be at least 1");
    if (n == 2) {
        if (!(t > 1.0)) throw Error(Code::Domain, "D_2(t) is defined for t > 1 only");
        return std::sqrt(std::log(t));
    }
    if (!(t > 0.0)) throw Error(Code::Domain, "D_n(t) requires t > 0");
    if (n == 1) return std::sqrt(t);
    return std::pow(t, -(n - 2) / 4.0);
}

int rate_F_branch(double m, int n, double s)
{
    auto fm = as_frac(m), fs = as_frac(s);
    if (fm && fs) return f_branch<Frac>(*fm, Frac(n), *fs);
    return f_branch<double>(m, n, s);
}

RateSpec rate_F_spec(double m, int n, double s)
{
    if (n < 1) throw Error(Code::InvalidDimension, "n must be at least 1");
    if (!(m >= 1.0 && m < 2.0)) throw Error(Code::OutOfRange, "m must lie in [1,2)");
    check_s(s);
    double main = 0.5 - s / 2.0 - n * (2.0 - m) / (4.0 * m);
    double q = 2.0 * s * m + (2.0 - m) * n;
    switch (rate_F_branch(m, n, s)) {
    case 0: return {1.0 - s - n * (2.0 - m) / (2.0 * m), 0.0, false};
    case 1: return {main, (2.0 - m) / (2.0 * m), false};
    case 2: return {main + (2.0 + m - q) / (2.0 * (2.0 + m)), 0.0, false};
    default: return {main, 0.0, false};
    }
}

double rate_F(double m, int n, double s, double t) { return rate_F_spec(m, n, s)(t); }

RateSpec rate_g_tilde_spec(int n, double s)
{
    if (n < 2) throw Error(Code::InvalidDimension, "g~ requires n >= 2");
    check_s(s);
    if (n == 2) {
        if (s == 0.0) return {0.0, 0.5, false};
        if (s < 0.5) return {(1.0 - 5.0 * s) / 6.0, 0.0, false};
        return {-s / 2.0, 0.0, false};
    }
    return {0.5 - s / 2.0 - n / 4.0, 0.0, false};
}

double rate_g_tilde(int n, double s, double t) { return rate_g_tilde_spec(n, s)(t); }

RateSpec rate_h_spec(double s)
{
    check_s(s);
    if (s < 1.0) return {1.0 - s / 2.0, 0.0, false};
    return {0.5 - s / 2.0, 0.0, false};
}

double rate_h(double s, double t) { return rate_h_spec(s)(t); }

Admissibility global_existence_admissible(int n, double s, double p)
{
    std::string why;
    auto fs = as_frac(s), fp = as_frac(p);
    if (!std::isfinite(s) || !std::isfinite(p))
        why = "s and p must be finite";
    else if (fs && fp)
        why = ge_violation<Frac>(n, *fs, *fp);
    else
        why = ge_violation<double>(n, s, p);
    if (why.empty()) return {true, "all hypotheses hold"};
    return {false, why};
}

bool blowup_admissible(int n, double p)
{
    if (n < 1) throw Error(Code::InvalidDimension, "n must be at least 1");
    if (!(p > 1.0)) throw Error(Code::OutOfRange, "blow-up range requires p > 1");
    if (n == 1) return true;
    auto fp = as_frac(p);
    if (fp) return cmp(*fp, Frac(n + 1, n - 1)) <= 0;
    return cmp(p, static_cast<double>(n + 1) / (n - 1)) <= 0;
}

}  // namespace mgt
