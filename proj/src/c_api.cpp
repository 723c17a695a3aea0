#include "mgt_lab.h"

#include "mgt/analysis_lab.hpp"
#include "mgt/cli_runner.hpp"
#include "mgt/error.hpp"
#include "mgt/field_solver.hpp"
#include "mgt/model_rates.hpp"
#include "mgt/ode_oracle.hpp"
#include "mgt/parallel.hpp"
#include "mgt/spectral_kernel.hpp"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>

struct mgt_params {
    mgt::ModelParams p;
};

struct mgt_grid {
    mgt::Grid g;
};

struct mgt_field {
    mgt::SpectralField f;
};

struct mgt_config {
    mgt::ConfigBuilder b;
};

namespace {

thread_local std::string last_error;

mgt_status to_status(mgt::Code c)
{
    using mgt::Code;
    switch (c) {
    case Code::Ok: return MGT_OK;
    case Code::NonDissipative: return MGT_ERR_NON_DISSIPATIVE;
    case Code::ConservativeCase: return MGT_ERR_CONSERVATIVE_CASE;
    case Code::InvalidDimension: return MGT_ERR_INVALID_DIMENSION;
    case Code::OutOfRange: return MGT_ERR_OUT_OF_RANGE;
    case Code::Domain: return MGT_ERR_DOMAIN;
    case Code::OutOfZone: return MGT_ERR_OUT_OF_ZONE;
    case Code::StepFailure: return MGT_ERR_STEP_FAILURE;
    case Code::UnsupportedDimension: return MGT_ERR_UNSUPPORTED_DIMENSION;
    case Code::Overflow: return MGT_ERR_OVERFLOW;
    case Code::RadiusExceedsBox: return MGT_ERR_RADIUS_EXCEEDS_BOX;
    case Code::InsufficientData: return MGT_ERR_INSUFFICIENT_DATA;
    case Code::NonPositiveValues: return MGT_ERR_NON_POSITIVE_VALUES;
    case Code::ZeroMass: return MGT_ERR_ZERO_MASS;
    case Code::ParameterWindowViolation: return MGT_ERR_PARAMETER_WINDOW;
    case Code::DimensionTooLow: return MGT_ERR_DIMENSION_TOO_LOW;
    case Code::InadmissibleTriple: return MGT_ERR_INADMISSIBLE_TRIPLE;
    case Code::Config: return MGT_ERR_CONFIG;
    case Code::IO: return MGT_ERR_IO;
    case Code::InvalidArgument: return MGT_ERR_INVALID_ARGUMENT;
    case Code::Internal: return MGT_ERR_INTERNAL;
    }
    return MGT_ERR_INTERNAL;
}

template <class F>
mgt_status guard(F&& f)
{
    try {
        last_error.clear();
        f();
        return MGT_OK;
    } catch (const mgt::Error& e) {
        last_error = std::string(mgt::code_name(e.code())) + ": " + e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return MGT_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return MGT_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what)
{
    if (!p) throw mgt::Error(mgt::Code::InvalidArgument, std::string(what) + " must not be NULL");
}

mgt::Sampler wrap(mgt_sampler s, void* user)
{
    if (!s) return nullptr;
    return [s, user](const std::array<double, 3>& x) { return s(x.data(), user); };
}

}  // namespace

extern "C" {

const char* mgt_status_string(mgt_status s)
{
    switch (s) {
    case MGT_OK: return "Ok";
    case MGT_ERR_NON_DISSIPATIVE: return "NonDissipative";
    case MGT_ERR_CONSERVATIVE_CASE: return "ConservativeCase";
    case MGT_ERR_INVALID_DIMENSION: return "InvalidDimension";
    case MGT_ERR_OUT_OF_RANGE: return "OutOfRange";
    case MGT_ERR_DOMAIN: return "Domain";
    case MGT_ERR_OUT_OF_ZONE: return "OutOfZone";
    case MGT_ERR_STEP_FAILURE: return "StepFailure";
    case MGT_ERR_UNSUPPORTED_DIMENSION: return "UnsupportedDimension";
    case MGT_ERR_OVERFLOW: return "Overflow";
    case MGT_ERR_RADIUS_EXCEEDS_BOX: return "RadiusExceedsBox";
    case MGT_ERR_INSUFFICIENT_DATA: return "InsufficientData";
    case MGT_ERR_NON_POSITIVE_VALUES: return "NonPositiveValues";
    case MGT_ERR_ZERO_MASS: return "ZeroMass";
    case MGT_ERR_PARAMETER_WINDOW: return "ParameterWindowViolation";
    case MGT_ERR_DIMENSION_TOO_LOW: return "DimensionTooLow";
    case MGT_ERR_INADMISSIBLE_TRIPLE: return "InadmissibleTriple";
    case MGT_ERR_CONFIG: return "ConfigError";
    case MGT_ERR_IO: return "IOError";
    case MGT_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case MGT_ERR_INTERNAL: return "Internal";
    }
    return "Unknown";
}

const char* mgt_last_error(void) { return last_error.c_str(); }

void mgt_set_max_threads(int n) { mgt::set_max_threads(n); }

mgt_status mgt_params_create(double tau, double beta, mgt_params** out)
{
    return guard([&] {
        need(out, "out");
        *out = new mgt_params{mgt::validate_params(tau, beta)};
    });
}

void mgt_params_destroy(mgt_params* p) { delete p; }

mgt_status mgt_params_get(const mgt_params* p, double* tau, double* beta)
{
    return guard([&] {
        need(p, "params");
        if (tau) *tau = p->p.tau;
        if (beta) *beta = p->p.beta;
    });
}

mgt_status mgt_rate_D(int n, double t, double* out)
{
    return guard([&] {
        need(out, "out");
        *out = mgt::rate_D(n, t);
    });
}

mgt_status mgt_rate_F(double m, int n, double s, double t, double* out)
{
    return guard([&] {
        need(out, "out");
        *out = mgt::rate_F(m, n, s, t);
    });
}

mgt_status mgt_rate_g_tilde(int n, double s, double t, double* out)
{
    return guard([&] {
        need(out, "out");
        *out = mgt::rate_g_tilde(n, s, t);
    });
}

mgt_status mgt_rate_h(double s, double t, double* out)
{
    return guard([&] {
        need(out, "out");
        *out = mgt::rate_h(s, t);
    });
}

mgt_status mgt_global_existence_admissible(int n, double s, double p, int* ok)
{
    return guard([&] {
        need(ok, "ok");
        auto a = mgt::global_existence_admissible(n, s, p);
        *ok = a.ok ? 1 : 0;
        if (!a.ok) last_error = a.reason;
    });
}

mgt_status mgt_blowup_admissible(int n, double p, int* ok)
{
    return guard([&] {
        need(ok, "ok");
        *ok = mgt::blowup_admissible(n, p) ? 1 : 0;
    });
}

mgt_status mgt_char_roots(const mgt_params* p, double r, mgt_complex roots[3], double* min_gap, int* degenerate)
{
    return guard([&] {
        need(p, "params");
        need(roots, "roots");
        auto tr = mgt::char_roots(r, p->p);
        for (int i = 0; i < 3; ++i) roots[i] = {tr.roots[i].real(), tr.roots[i].imag()};
        if (min_gap) *min_gap = tr.min_gap;
        if (degenerate) *degenerate = tr.degenerate ? 1 : 0;
    });
}

mgt_status mgt_kernel_values(const mgt_params* p, double t, double r, double K[9])
{
    return guard([&] {
        need(p, "params");
        need(K, "K");
        auto kv = mgt::kernel_values(t, r, p->p);
        for (int m = 0; m < 3; ++m)
            for (int d = 0; d < 3; ++d) K[3 * m + d] = kv(m, d);
    });
}

mgt_status mgt_integrate_mode(const mgt_params* p, double r, const double init[3], double tol, size_t n_times,
                              const double* times, double* states, double* est_error)
{
    return guard([&] {
        need(p, "params");
        need(init, "init");
        if (n_times == 0) throw mgt::Error(mgt::Code::InvalidArgument, "need at least one output time");
        need(times, "times");
        need(states, "states");
        std::vector<double> ts(times, times + n_times);
        if (!std::is_sorted(ts.begin(), ts.end()) || ts.front() < 0.0)
            throw mgt::Error(mgt::Code::InvalidArgument, "times must be nonnegative and ascending");
        double T = *std::max_element(ts.begin(), ts.end());
        auto tr = mgt::integrate_mode(p->p, r, {init[0], init[1], init[2]}, T, tol, ts);
        // integrate_mode reports t = 0 first; requested times follow in order.
        std::size_t off = tr.times.size() - n_times;
        for (std::size_t i = 0; i < n_times; ++i)
            for (int d = 0; d < 3; ++d) states[3 * i + d] = tr.states[off + i][d];
        if (est_error) *est_error = tr.est_error;
    });
}

mgt_status mgt_grid_create(int n, double L, int N, mgt_grid** out)
{
    return guard([&] {
        need(out, "out");
        *out = new mgt_grid{mgt::Grid(n, L, N)};
    });
}

void mgt_grid_destroy(mgt_grid* g) { delete g; }

size_t mgt_grid_size(const mgt_grid* g) { return g ? g->g.size() : 0; }

mgt_status mgt_field_create(const mgt_grid* g, mgt_sampler u0, mgt_sampler u1, mgt_sampler u2, void* user,
                            mgt_field** out)
{
    return guard([&] {
        need(g, "grid");
        need(out, "out");
        *out = new mgt_field{mgt::make_field(g->g, wrap(u0, user), wrap(u1, user), wrap(u2, user))};
    });
}

void mgt_field_destroy(mgt_field* f) { delete f; }

double mgt_field_time(const mgt_field* f) { return f ? f->f.t : 0.0; }

mgt_status mgt_field_values(const mgt_field* f, double* values)
{
    return guard([&] {
        need(f, "field");
        need(values, "values");
        auto u = f->f.grid.backward(f->f.u_hat);
        std::copy(u.begin(), u.end(), values);
    });
}

mgt_status mgt_field_norm(const mgt_field* f, int kind, double s, double* out)
{
    return guard([&] {
        need(f, "field");
        need(out, "out");
        switch (kind) {
        case MGT_NORM_L2: *out = mgt::norm_L2(f->f); break;
        case MGT_NORM_HS_DOT: *out = mgt::norm_Hs_dot(f->f, s); break;
        case MGT_NORM_LINF: *out = mgt::norm_Linf(f->f); break;
        case MGT_NORM_MASS: *out = mgt::mass_P(f->f); break;
        default: throw mgt::Error(mgt::Code::InvalidArgument, "unknown norm kind");
        }
    });
}

mgt_status mgt_field_linear_evolve(const mgt_field* f, const mgt_params* p, double t, mgt_field** out)
{
    return guard([&] {
        need(f, "field");
        need(p, "params");
        need(out, "out");
        *out = new mgt_field{mgt::linear_evolve(f->f, p->p, t)};
    });
}

mgt_status mgt_field_evolve_until(const mgt_field* f, const mgt_params* p, double power, double T, int* blowup,
                                  double bracket[2], mgt_field** out)
{
    return guard([&] {
        need(f, "field");
        need(p, "params");
        auto r = mgt::evolve_until(f->f, p->p, power, T, {});
        bool b = r.status == mgt::EvolveStatus::Blowup;
        if (blowup) *blowup = b ? 1 : 0;
        if (bracket && r.blowup_bracket) {
            bracket[0] = r.blowup_bracket->first;
            bracket[1] = r.blowup_bracket->second;
        }
        if (out) *out = new mgt_field{std::move(r.final)};
    });
}

mgt_status mgt_field_write_binary(const mgt_field* f, const char* path)
{
    return guard([&] {
        need(f, "field");
        need(path, "path");
        mgt::write_binary(f->f, path);
    });
}

mgt_status mgt_config_create(mgt_config** out)
{
    return guard([&] {
        need(out, "out");
        *out = new mgt_config{};
    });
}

void mgt_config_destroy(mgt_config* c) { delete c; }

mgt_status mgt_config_load_file(mgt_config* c, const char* path)
{
    return guard([&] {
        need(c, "config");
        need(path, "path");
        c->b.load_file(path);
    });
}

mgt_status mgt_config_load_text(mgt_config* c, const char* text)
{
    return guard([&] {
        need(c, "config");
        need(text, "text");
        c->b.load_text(text);
    });
}

mgt_status mgt_config_set(mgt_config* c, const char* key, const char* value)
{
    return guard([&] {
        need(c, "config");
        need(key, "key");
        need(value, "value");
        c->b.set(key, value);
    });
}

mgt_status mgt_config_set_preset(mgt_config* c, const char* preset)
{
    return guard([&] {
        need(c, "config");
        need(preset, "preset");
        c->b.set_preset(preset);
    });
}

mgt_status mgt_config_serialize(const mgt_config* c, char* buf, size_t cap, size_t* needed)
{
    return guard([&] {
        need(c, "config");
        std::string s = mgt::serialize_config(c->b.build());
        if (needed) *needed = s.size() + 1;
        if (buf && cap > 0) {
            std::size_t n = std::min(cap - 1, s.size());
            std::memcpy(buf, s.data(), n);
            buf[n] = '\0';
        }
    });
}

mgt_status mgt_run(const mgt_config* c, int* exit_code)
{
    return guard([&] {
        need(c, "config");
        need(exit_code, "exit_code");
        *exit_code = mgt::run_and_write(c->b.build()).exit_code;
    });
}

}  // extern "C"
