#include "mgt/cli_runner.hpp"

#include "mgt/analysis_lab.hpp"
#include "mgt/error.hpp"
#include "mgt/field_solver.hpp"
#include "mgt/spectral_kernel.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace mgt {

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::pair<Preset, const char*>> kPresets = {
    {Preset::Roots, "roots"},
    {Preset::KernelCheck, "kernel-check"},
    {Preset::Rates, "rates"},
    {Preset::LinearDecay, "linear-decay"},
    {Preset::Profile, "profile"},
    {Preset::ApproxRelation, "approx-relation"},
    {Preset::SingularLimit, "singular-limit"},
    {Preset::SolutionLimit, "solution-limit"},
    {Preset::SemilinearDecay, "semilinear-decay"},
    {Preset::BlowupScan, "blowup-scan"},
    {Preset::FpsCheck, "fps-check"},
};

[[noreturn]] void config_error(const std::string& field, const std::string& msg)
{
    throw Error(Code::Config, field + ": " + msg);
}

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& v)
{
    std::string s = trim(v);
    double x = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(x))
        config_error(key, "expected a finite number, got '" + v + "'");
    return x;
}

long parse_int(const std::string& key, const std::string& v)
{
    std::string s = trim(v);
    long x = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
        config_error(key, "expected an integer, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    std::string s = trim(v);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    config_error(key, "expected true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    return out;
}

std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

bool is_box_preset(Preset p)
{
    return p == Preset::SingularLimit || p == Preset::SolutionLimit || p == Preset::SemilinearDecay ||
           p == Preset::BlowupScan || p == Preset::FpsCheck;
}

// Defaults that depend on the preset; keys left unset by the user take these values.
std::map<std::string, std::string> preset_defaults(Preset p)
{
    std::map<std::string, std::string> d;
    switch (p) {
    case Preset::Roots:
        d = {{"tolerance", "1e-12"}, {"t_lo", "0.001"}, {"t_hi", "1000"}, {"per_decade", "10"}};
        break;
    case Preset::KernelCheck:
        d = {{"tolerance", "1e-8"}, {"t_lo", "0.1"}, {"t_hi", "10"}, {"per_decade", "1"}};
        break;
    case Preset::Rates:
        d = {{"tolerance", "1e-12"}, {"t_lo", "1"}, {"t_hi", "10000"}, {"per_decade", "10"}};
        break;
    case Preset::LinearDecay:
    case Preset::Profile:
    case Preset::ApproxRelation:
        d = {{"t_lo", "100"}, {"t_hi", "10000"}, {"tolerance", p == Preset::Profile ? "2" : "0.05"}};
        break;
    case Preset::SingularLimit:
        d = {{"n", "1"}, {"L", "64"}, {"N", "512"}, {"T", "1"}, {"tolerance", "0.15"}};
        break;
    case Preset::SolutionLimit:
        d = {{"n", "3"}, {"L", "16"}, {"N", "64"}, {"T", "1"}, {"tolerance", "0.2"}};
        break;
    case Preset::SemilinearDecay:
        d = {{"n", "3"}, {"s", "1"}, {"p", "3"}, {"L", "20"}, {"N", "64"}, {"T", "200"},
             {"profile", "odd-gaussian"}, {"t_lo", "1"}, {"tolerance", "0.2"}};
        break;
    case Preset::BlowupScan:
        d = {{"n", "1"}, {"p", "2"}, {"L", "64"}, {"N", "256"}, {"T", "100000"}, {"tolerance", "0.001"}};
        break;
    case Preset::FpsCheck:
        d = {{"n", "1"}, {"L", "32"}, {"N", "1024"}, {"T", "5"}, {"profile", "bump"}, {"tolerance", "1e-8"}};
        break;
    }
    return d;
}

}  // namespace

const char* preset_name(Preset p)
{
    for (const auto& [k, name] : kPresets)
        if (k == p) return name;
    return "unknown";
}

std::optional<Preset> preset_from_name(const std::string& name)
{
    for (const auto& [k, n] : kPresets)
        if (name == n) return k;
    return std::nullopt;
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = {
        "tau",       "beta",    "n",          "m",         "s",          "p",      "T",          "L",
        "N",         "profile", "center",     "width",     "amplitude",  "t_lo",   "t_hi",       "per_decade",
        "window_lo", "window_hi", "fit",      "tolerance", "taus",       "prepared", "eps",      "rho",
        "margin",    "samples", "oracle_tol", "field",     "out",        "seed",   "jobs"};
    return keys;
}

namespace {

void check_key(const std::string& key, const std::string& where)
{
    const auto& k = config_keys();
    if (std::find(k.begin(), k.end(), key) == k.end()) config_error(where, "unknown key '" + key + "'");
}

}  // namespace

void ConfigBuilder::load_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw Error(Code::Config, "config: cannot read file '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    load_text(ss.str());
}

void ConfigBuilder::load_text(const std::string& text)
{
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::string where = "line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') config_error(where, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!preset_from_name(section)) config_error(where, "unknown preset section '" + section + "'");
            sections_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) config_error(where, "expected key = value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key == "preset") {
            if (!section.empty()) config_error(where, "preset must be set at top level");
            if (!preset_from_name(value)) config_error(where, "unknown preset '" + value + "'");
            preset_ = value;
            continue;
        }
        check_key(key, where);
        if (section.empty())
            top_[key] = value;
        else
            sections_[section][key] = value;
    }
}

void ConfigBuilder::set(const std::string& key, const std::string& value)
{
    if (key == "preset") {
        set_preset(value);
        return;
    }
    check_key(key, "--" + key);
    overrides_[key] = value;
}

void ConfigBuilder::set_preset(const std::string& name)
{
    if (!preset_from_name(name)) config_error("preset", "unknown preset '" + name + "'");
    override_preset_ = name;
}

ExperimentConfig ConfigBuilder::build() const
{
    std::string pname;
    if (override_preset_)
        pname = *override_preset_;
    else if (preset_)
        pname = *preset_;
    else if (sections_.size() == 1)
        pname = sections_.begin()->first;
    else
        config_error("preset", "no preset given");

    ExperimentConfig c;
    c.preset = *preset_from_name(pname);
    std::map<std::string, std::string> kv = preset_defaults(c.preset);
    for (const auto& [k, v] : top_) kv[k] = v;
    if (auto it = sections_.find(pname); it != sections_.end())
        for (const auto& [k, v] : it->second) kv[k] = v;
    for (const auto& [k, v] : overrides_) kv[k] = v;

    auto has = [&](const char* k) { return kv.count(k) > 0; };
    auto num = [&](const char* k, double& dst) {
        if (has(k)) dst = parse_double(k, kv.at(k));
    };
    auto integer = [&](const char* k, auto& dst) {
        if (has(k)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(parse_int(k, kv.at(k)));
    };

    num("tau", c.params.tau);
    num("beta", c.params.beta);
    try {
        c.params = validate_params(c.params.tau, c.params.beta);
    } catch (const Error& e) {
        config_error("params.tau", std::string(code_name(e.code())) + ": " + e.what());
    }
    integer("n", c.n);
    num("m", c.m);
    num("s", c.s);
    num("p", c.p);
    num("T", c.T);
    num("L", c.L);
    integer("N", c.N);
    if (has("profile")) c.profile = trim(kv.at("profile"));
    if (has("center")) {
        auto v = parse_list("center", kv.at("center"));
        if (v.empty() || v.size() > 3) config_error("data.center", "expected 1 to 3 coordinates");
        c.center = {0.0, 0.0, 0.0};
        std::copy(v.begin(), v.end(), c.center.begin());
    }
    num("width", c.width);
    num("amplitude", c.amplitude);
    num("t_lo", c.t_lo);
    if (c.preset == Preset::SemilinearDecay && !has("t_hi")) kv["t_hi"] = kv.count("T") ? kv.at("T") : fmt(c.T);
    num("t_hi", c.t_hi);
    integer("per_decade", c.per_decade);
    c.window_lo = c.t_lo;
    c.window_hi = c.t_hi;
    num("window_lo", c.window_lo);
    num("window_hi", c.window_hi);
    if (has("fit")) c.fit = trim(kv.at("fit"));
    num("tolerance", c.tolerance);
    if (has("taus")) {
        c.taus = parse_list("taus", kv.at("taus"));
    } else if (c.preset == Preset::SingularLimit || c.preset == Preset::SolutionLimit) {
        for (double d : {4.0, 8.0, 16.0, 32.0, 64.0}) c.taus.push_back(c.params.beta / d);
    } else if (c.preset == Preset::KernelCheck) {
        c.taus = {c.params.tau};
    }
    if (has("prepared")) c.prepared = parse_bool("prepared", kv.at("prepared"));
    num("eps", c.eps);
    num("rho", c.rho);
    num("margin", c.margin);
    integer("samples", c.samples);
    num("oracle_tol", c.oracle_tol);
    if (has("field")) c.field = parse_bool("field", kv.at("field"));
    if (has("out")) c.out = trim(kv.at("out"));
    if (has("seed")) {
        long sd = parse_int("seed", kv.at("seed"));
        if (sd < 0) config_error("seed", "must be nonnegative");
        c.seed = static_cast<unsigned>(sd);
    }
    integer("jobs", c.jobs);

    // Validation, reported with the config field path.
    if (c.n < 1) config_error("n", "dimension must be at least 1");
    if (is_box_preset(c.preset)) {
        if (c.n > 3) config_error("grid.n", "box presets support n = 1, 2, 3");
        if (c.N < 4 || (c.N & (c.N - 1)) != 0) config_error("grid.N", "must be a power of two >= 4");
        if (!(c.L > 0.0)) config_error("grid.L", "must be positive");
    }
    if (!(c.s >= 0.0 && c.s <= 2.0)) config_error("s", "must lie in [0,2]");
    if (!(c.m >= 1.0 && c.m < 2.0)) config_error("m", "must lie in [1,2)");
    if (!(c.T > 0.0)) config_error("T", "must be positive");
    if (c.profile != "gaussian" && c.profile != "bump" && c.profile != "odd-gaussian")
        config_error("data.profile", "expected gaussian, bump or odd-gaussian");
    if (!(c.width > 0.0)) config_error("data.width", "must be positive");
    if (!(c.t_lo > 0.0 && c.t_hi > c.t_lo)) config_error("times", "need 0 < t_lo < t_hi");
    if (c.per_decade < 1) config_error("times.per_decade", "must be at least 1");
    if (!(c.window_lo < c.window_hi)) config_error("window", "need window_lo < window_hi");
    if (c.fit != "auto" && c.fit != "pure-power" && c.fit != "log-only" && c.fit != "power-times-log")
        config_error("fit", "expected auto, pure-power, log-only or power-times-log");
    if (!(c.tolerance >= 0.0)) config_error("tolerance", "must be nonnegative");
    if (c.samples < 1) config_error("samples", "must be at least 1");
    if (!(c.oracle_tol > 0.0)) config_error("oracle_tol", "must be positive");
    if (c.jobs < 1) config_error("jobs", "must be at least 1");
    if (c.out.empty()) config_error("out", "must not be empty");
    if (!(c.eps >= 0.0)) config_error("eps", "must be nonnegative");
    if (!(c.rho > 0.0)) config_error("rho", "must be positive");
    if (!(c.margin >= 0.0)) config_error("margin", "must be nonnegative");
    for (double t : c.taus)
        if (!(t > 0.0 && t < c.params.beta)) config_error("taus", "every tau must lie in (0, beta)");
    if (c.preset == Preset::SemilinearDecay) {
        auto a = global_existence_admissible(c.n, c.s, c.p);
        if (!a.ok) config_error("p", "inadmissible (n, s, p): " + a.reason);
    }
    if (c.preset == Preset::BlowupScan && !(c.p > 1.0)) config_error("p", "blow-up scan needs p > 1");
    if (c.preset == Preset::SolutionLimit && c.n < 3)
        config_error("n", "solution-limit slope needs n >= 3; n = 1, 2 only admit the t^2 bound");
    return c;
}

ExperimentConfig parse_config_text(const std::string& text)
{
    ConfigBuilder b;
    b.load_text(text);
    return b.build();
}

ExperimentConfig parse_config_file(const std::string& path)
{
    ConfigBuilder b;
    b.load_file(path);
    return b.build();
}

std::string serialize_config(const ExperimentConfig& c)
{
    std::ostringstream os;
    os << "[" << preset_name(c.preset) << "]\n";
    auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << "\n"; };
    kv("tau", fmt(c.params.tau));
    kv("beta", fmt(c.params.beta));
    kv("n", std::to_string(c.n));
    kv("m", fmt(c.m));
    kv("s", fmt(c.s));
    kv("p", fmt(c.p));
    kv("T", fmt(c.T));
    kv("L", fmt(c.L));
    kv("N", std::to_string(c.N));
    kv("profile", c.profile);
    kv("center", join({c.center[0], c.center[1], c.center[2]}));
    kv("width", fmt(c.width));
    kv("amplitude", fmt(c.amplitude));
    kv("t_lo", fmt(c.t_lo));
    kv("t_hi", fmt(c.t_hi));
    kv("per_decade", std::to_string(c.per_decade));
    kv("window_lo", fmt(c.window_lo));
    kv("window_hi", fmt(c.window_hi));
    kv("fit", c.fit);
    kv("tolerance", fmt(c.tolerance));
    if (!c.taus.empty()) kv("taus", join(c.taus));
    kv("prepared", c.prepared ? "true" : "false");
    kv("eps", fmt(c.eps));
    kv("rho", fmt(c.rho));
    kv("margin", fmt(c.margin));
    kv("samples", std::to_string(c.samples));
    kv("oracle_tol", fmt(c.oracle_tol));
    kv("field", c.field ? "true" : "false");
    kv("out", c.out);
    kv("seed", std::to_string(c.seed));
    kv("jobs", std::to_string(c.jobs));
    return os.str();
}

std::string normalize_config(const std::string& text) { return serialize_config(parse_config_text(text)); }

// ---- experiment runners ------------------------------------------------

namespace {

struct Csv {
    std::ostringstream os;
    explicit Csv(const std::vector<std::string>& cols)
    {
        for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
        os << "\n";
    }
    void row(const std::vector<double>& v)
    {
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << fmt(v[i]);
        os << "\n";
    }
};

json num_json(double x)
{
    if (std::isfinite(x)) return x;
    return nullptr;
}

struct Outcome {
    double deviation = 0.0;
    bool extra_ok = true;  // preset-specific qualitative checks
    json metrics = json::object();
    json expected = json::object();
    std::optional<SpectralField> field;
};

Sampler make_sampler(const ExperimentConfig& c, double width_scale = 1.0, double amp_scale = 1.0)
{
    double w = c.width * width_scale, a = c.amplitude * amp_scale;
    if (c.profile == "bump") return bump_profile(c.center, w, a, c.n);
    if (c.profile == "odd-gaussian") return odd_gaussian_profile(c.center, w, a, c.n);
    return gaussian_profile(c.center, w, a, c.n);
}

// Radial presets use the Gaussian transform in closed form.
RadialData radial_data(const ExperimentConfig& c)
{
    if (c.profile != "gaussian") config_error("data.profile", "radial presets need a gaussian profile");
    return gaussian_radial(c.n, c.width, c.amplitude);
}

FitModel fit_model_of(const std::string& s)
{
    if (s == "pure-power") return FitModel::PurePower;
    if (s == "log-only") return FitModel::LogOnly;
    if (s == "power-times-log") return FitModel::PowerTimesLog;
    return FitModel::Auto;
}

json fit_json(const DecayFit& f)
{
    return {{"model", fit_model_name(f.model)},
            {"exponent_t", f.exponent_t},
            {"exponent_log", f.exponent_log},
            {"intercept", f.intercept},
            {"window", {f.window.first, f.window.second}},
            {"rms_residual", f.rms_residual}};
}

double fit_value(const DecayFit& f, double t)
{
    switch (f.model) {
    case FitModel::PurePower: return std::exp(f.intercept + f.exponent_t * std::log(t));
    case FitModel::LogOnly: return std::exp(f.intercept + f.exponent_log * std::log(std::log(t)));
    default:
        return std::exp(f.intercept + f.exponent_t * std::log1p(t) +
                        f.exponent_log * std::log(std::log(std::numbers::e + t)));
    }
}

Outcome run_roots(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    for (double r : log_times(c.t_lo, c.t_hi, c.per_decade)) {
        auto tr = char_roots(r, c.params);
        const auto& l = tr.roots;
        csv.row({0.0, r, l[0].real(), l[0].imag(), l[1].real(), l[1].imag(), l[2].real(), l[2].imag(), tr.min_gap,
                 tr.degenerate ? 1.0 : 0.0});
    }
    auto inv = root_invariants(c.samples, c.seed);
    o.deviation = std::max(inv.vieta_max, inv.partial_fraction_max);
    o.extra_ok = inv.max_real_part < 0.0;
    o.metrics = {{"samples", inv.samples},
                 {"vieta_max", inv.vieta_max},
                 {"partial_fraction_max", inv.partial_fraction_max},
                 {"max_real_part", inv.max_real_part},
                 {"degenerate_skipped", inv.degenerate_skipped}};
    o.expected = {{"vieta_max", 0.0}, {"partial_fraction_max", 0.0}, {"max_real_part", "< 0"}};
    return o;
}

Outcome run_kernel_check(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    std::vector<double> radii{0.0, 1e-3, 1e-1, 1.0, 10.0, 1e3};
    auto kc = kernel_check(c.taus, c.params.beta, radii, log_times(c.t_lo, c.t_hi, c.per_decade), true, c.oracle_tol);
    for (const auto& r : kc.rows) csv.row({r.t, r.tau, r.r, r.rel_err});
    o.deviation = kc.max_rel_err;
    o.metrics = {{"max_rel_err", kc.max_rel_err}, {"samples", kc.samples}};
    o.expected = {{"max_rel_err", 0.0}};
    return o;
}

Outcome run_rates(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    json table = json::array();
    int n = c.n;
    double dev = 0.0;
    for (double t : log_times(c.t_lo, c.t_hi, c.per_decade)) {
        double D = (n == 2 && t <= 1.0) ? std::nan("") : rate_D(n, t);
        double F = rate_F(c.m, n, c.s, t);
        double g = n >= 2 ? rate_g_tilde(n, c.s, t) : std::nan("");
        double h = rate_h(c.s, t);
        csv.row({t, D, F, g, h});
        table.push_back({{"t", t}, {"D", num_json(D)}, {"F", num_json(F)}, {"g_tilde", num_json(g)}, {"h", h}});
        // The table is read back through the same functions; any difference would be a formatting fault.
        dev = std::max(dev, std::fabs(rate_F(c.m, n, c.s, t) - F));
    }
    o.deviation = dev;
    o.metrics = {{"table", table}, {"F_branch", rate_F_branch(c.m, n, c.s)}};
    return o;
}

Outcome run_linear_decay(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    auto data = radial_data(c);
    auto ts = log_times(c.t_lo, c.t_hi, c.per_decade);
    auto v = radial_linear_norms(data, c.params, c.s, ts);
    RateSpec spec = c.s == 0.0 ? rate_D_spec(c.n) : rate_F_spec(1.0, c.n, c.s);
    bool log_law = spec.power_t == 0.0 && spec.power_log != 0.0;
    auto fit = fit_decay(ts, v, {c.window_lo, c.window_hi}, fit_model_of(c.fit));
    for (std::size_t i = 0; i < ts.size(); ++i) csv.row({ts[i], v[i], fit_value(fit, ts[i])});
    if (log_law) {
        // Auto must select the log-only law; an explicitly requested joint fit is judged by its log exponent.
        o.extra_ok = fit.model == FitModel::LogOnly || c.fit == "power-times-log";
        o.deviation = std::fabs(fit.exponent_log - spec.power_log);
        o.expected = {{"model", "log-only"}, {"exponent_log", spec.power_log}};
    } else {
        o.deviation = std::fabs(fit.exponent_t - spec.power_t);
        if (fit.model == FitModel::LogOnly) o.extra_ok = false;
        o.expected = {{"model", "pure-power"}, {"exponent_t", spec.power_t}};
    }
    o.metrics = {{"fit", fit_json(fit)}};
    if (c.n == 2 && c.s == 0.0) {
        auto ptl = fit_decay(ts, v, {c.window_lo, c.window_hi}, FitModel::PowerTimesLog);
        o.metrics["power_times_log_fit"] = fit_json(ptl);
    }
    return o;
}

Outcome run_profile(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    auto data = radial_data(c);
    auto ts = log_times(c.t_lo, c.t_hi, c.per_decade);
    auto ratio = profile_experiment(data, c.params, ts);
    double lo = *std::min_element(ratio.begin(), ratio.end()), hi = *std::max_element(ratio.begin(), ratio.end());
    for (std::size_t i = 0; i < ts.size(); ++i)
        csv.row({ts[i], ratio[i] * rate_D(c.n, ts[i]) * std::fabs(data.mass), ratio[i]});
    o.deviation = hi / lo;
    o.metrics = {{"ratio_min", lo}, {"ratio_max", hi}, {"band_factor", hi / lo}, {"mass", data.mass}};
    o.expected = {{"band_factor", "below tolerance"}};
    return o;
}

Outcome run_approx_relation(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    auto data = radial_data(c);
    auto ts = log_times(c.t_lo, c.t_hi, c.per_decade);
    auto diff = approx_relation_experiment(data, c.params, ts);
    auto u = radial_linear_norms(data, c.params, 0.0, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) csv.row({ts[i], diff[i], u[i]});
    auto fd = fit_decay(ts, diff, {c.window_lo, c.window_hi}, FitModel::PurePower);
    auto fu = fit_decay(ts, u, {c.window_lo, c.window_hi}, FitModel::PurePower);
    o.metrics = {{"difference_fit", fit_json(fd)}, {"solution_fit", fit_json(fu)}};
    if (c.n == 1) {
        o.deviation = std::fabs(fd.exponent_t - 0.25);
        o.expected = {{"difference_exponent_t", 0.25}};
    } else if (c.n == 2) {
        o.deviation = std::max(0.0, fd.exponent_t);
        o.extra_ok = u.back() > u.front();
        o.expected = {{"difference_exponent_t", "<= tolerance"}, {"solution", "grows"}};
    } else {
        // The gained rate for n >= 3 is an open question: measured and reported only.
        o.deviation = 0.0;
        o.expected = {{"difference_exponent_t", "reported only"}};
    }
    return o;
}

InitialData sweep_data(const ExperimentConfig& c)
{
    // u0, u1, u2 share the profile with distinct widths and amplitudes, so u2 differs from Lap u0 + beta Lap u1.
    return {make_sampler(c), make_sampler(c, 1.5, 0.5), make_sampler(c, 0.8, 0.7)};
}

Outcome run_singular_limit(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    Grid g(c.n, c.L, c.N);
    auto data = sweep_data(c);
    auto r = singular_limit_sweep(g, data, c.params.beta, c.taus, c.T, c.prepared, std::nullopt, c.jobs);
    json pts = json::array();
    for (const auto& p : r.points) {
        csv.row({c.T, p.tau, p.value, p.dissipation});
        pts.push_back({{"tau", p.tau}, {"energy", p.value}, {"dissipation", p.dissipation}});
    }
    double expect = c.prepared ? 2.0 : 1.0;
    o.deviation = std::fabs(r.slope - expect);
    o.metrics = {{"slope", r.slope},
                 {"energy_plus_dissipation_slope", r.dissipation_slope},
                 {"short_tau_span", r.short_span},
                 {"points", pts}};
    o.expected = {{"slope", expect}};
    if (c.field) {
        double tmin = *std::min_element(c.taus.begin(), c.taus.end());
        SpectralField base = make_field(g, data.u0, data.u1, data.u2);
        o.field = linear_evolve(base, {tmin, c.params.beta}, c.T);
    }
    return o;
}

Outcome run_solution_limit(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    Grid g(c.n, c.L, c.N);
    auto data = sweep_data(c);
    auto r = solution_limit_sweep(g, data, c.params.beta, c.taus, c.T, c.jobs);
    json pts = json::array();
    for (const auto& p : r.points) {
        csv.row({c.T, p.tau, p.value});
        pts.push_back({{"tau", p.tau}, {"w_l2_squared", p.value}});
    }
    o.deviation = std::fabs(r.slope - 2.0);
    o.metrics = {{"slope", r.slope},
                 {"weighted_data_warning", r.precondition_warning},
                 {"short_tau_span", r.short_span},
                 {"points", pts}};
    o.expected = {{"slope", 2.0}};
    if (c.field) {
        double tmin = *std::min_element(c.taus.begin(), c.taus.end());
        o.field = linear_evolve(make_field(g, data.u0, data.u1, data.u2), {tmin, c.params.beta}, c.T);
    }
    return o;
}

// Largest relative rise of w over its value at the first sample with t >= t_ref.
double drift_after(const std::vector<double>& t, const std::vector<double>& w, double t_ref)
{
    std::size_t i0 = 0;
    while (i0 < t.size() && t[i0] < t_ref) ++i0;
    if (i0 >= t.size() || !(w[i0] > 0.0)) return std::numeric_limits<double>::infinity();
    double mx = 0.0;
    for (std::size_t i = i0; i < t.size(); ++i) mx = std::max(mx, w[i] / w[i0] - 1.0);
    return mx;
}

Outcome run_semilinear_decay(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    Grid g(c.n, c.L, c.N);
    auto ts = log_times(c.t_lo, c.t_hi, c.per_decade);
    const double t_ref = 10.0;
    if (t_ref > c.t_lo && t_ref < c.t_hi) ts.push_back(t_ref);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    auto r = semilinear_decay_experiment(g, make_sampler(c), c.eps, c.params, c.s, c.p, c.T, ts);
    for (std::size_t i = 0; i < r.times.size(); ++i) csv.row({r.times[i], r.l2[i], r.hs[i], r.w_l2[i], r.w_hs[i]});
    bool completed = r.outcome.status == EvolveStatus::Completed;
    bool finite = std::isfinite(r.sup_l2) && std::isfinite(r.sup_hs);
    double d1 = drift_after(r.times, r.w_l2, t_ref), d2 = drift_after(r.times, r.w_hs, t_ref);
    o.deviation = std::max(d1, d2);
    o.extra_ok = completed && finite;
    o.metrics = {{"status", completed ? "completed" : "blowup"},
                 {"sup_weighted_l2", num_json(r.sup_l2)},
                 {"sup_weighted_hs", num_json(r.sup_hs)},
                 {"drift_l2_after_10", num_json(d1)},
                 {"drift_hs_after_10", num_json(d2)},
                 {"steps", r.outcome.steps},
                 {"rejected", r.outcome.rejected}};
    o.expected = {{"status", "completed"}, {"drift_after_10", "<= tolerance"}};
    o.field = r.outcome.final;
    return o;
}

Outcome run_blowup_scan(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    Grid g(c.n, c.L, c.N);
    auto r = blowup_scan(g, make_sampler(c), c.params, c.p, c.T);
    for (const auto& h : r.outcome.history) csv.row({h.t, h.l2, h.linf, h.h1});
    json bracket = nullptr;
    if (r.outcome.blowup_bracket) {
        auto [a, b] = *r.outcome.blowup_bracket;
        bracket = {a, b};
        o.deviation = (b - a) / b;
    }
    o.extra_ok = r.blowup || r.monotone_final_decade;
    o.metrics = {{"status", r.blowup ? "blowup" : "completed"},
                 {"case", r.verdict},
                 {"bracket", bracket},
                 {"final_t", r.outcome.final.t},
                 {"steps", r.outcome.steps},
                 {"rejected", r.outcome.rejected}};
    o.expected = {{"case", "blowup or monotone-growth"}, {"bracket_relative_width", "<= tolerance"}};
    o.field = r.outcome.final;
    return o;
}

Outcome run_fps_check(const ExperimentConfig& c, Csv& csv)
{
    Outcome o;
    Grid g(c.n, c.L, c.N);
    auto u2 = make_sampler(c);
    auto r = fps_check(g, u2, c.params, c.rho, c.T, c.margin);
    csv.row({c.T, r.R, r.outside, r.total, r.ratio});
    o.deviation = r.ratio;
    o.metrics = {{"R", r.R}, {"outside", r.outside}, {"total", r.total}, {"ratio", r.ratio}};
    o.expected = {{"ratio", "<= tolerance"}};
    if (c.field) o.field = linear_evolve(make_field(g, nullptr, nullptr, u2), c.params, c.T);
    return o;
}

std::vector<std::string> csv_columns(Preset p)
{
    switch (p) {
    case Preset::Roots: return {"t", "r", "re1", "im1", "re2", "im2", "re3", "im3", "min_gap", "degenerate"};
    case Preset::KernelCheck: return {"t", "tau", "r", "rel_err"};
    case Preset::Rates: return {"t", "D", "F", "g_tilde", "h"};
    case Preset::LinearDecay: return {"t", "norm", "fit"};
    case Preset::Profile: return {"t", "norm", "ratio"};
    case Preset::ApproxRelation: return {"t", "difference_norm", "solution_norm"};
    case Preset::SingularLimit: return {"t", "tau", "energy", "dissipation"};
    case Preset::SolutionLimit: return {"t", "tau", "w_l2_squared"};
    case Preset::SemilinearDecay: return {"t", "l2", "hs", "weighted_l2", "weighted_hs"};
    case Preset::BlowupScan: return {"t", "l2", "linf", "h1"};
    case Preset::FpsCheck: return {"t", "R", "outside", "total", "ratio"};
    }
    return {"t"};
}

RunResult run_impl(const ExperimentConfig& c, std::optional<SpectralField>* field_out)
{
    Csv csv(csv_columns(c.preset));
    Outcome o;
    switch (c.preset) {
    case Preset::Roots: o = run_roots(c, csv); break;
    case Preset::KernelCheck: o = run_kernel_check(c, csv); break;
    case Preset::Rates: o = run_rates(c, csv); break;
    case Preset::LinearDecay: o = run_linear_decay(c, csv); break;
    case Preset::Profile: o = run_profile(c, csv); break;
    case Preset::ApproxRelation: o = run_approx_relation(c, csv); break;
    case Preset::SingularLimit: o = run_singular_limit(c, csv); break;
    case Preset::SolutionLimit: o = run_solution_limit(c, csv); break;
    case Preset::SemilinearDecay: o = run_semilinear_decay(c, csv); break;
    case Preset::BlowupScan: o = run_blowup_scan(c, csv); break;
    case Preset::FpsCheck: o = run_fps_check(c, csv); break;
    }
    RunResult res;
    // A zero tolerance can never be met, which makes forced failures easy to request.
    res.pass = o.extra_ok && c.tolerance > 0.0 && o.deviation <= c.tolerance;
    res.exit_code = res.pass ? 0 : 2;
    res.deviation = o.deviation;
    res.csv = csv.os.str();
    json s = {{"preset", preset_name(c.preset)},
              {"params", {{"tau", c.params.tau}, {"beta", c.params.beta}}},
              {"seed", c.seed},
              {"metrics", o.metrics},
              {"expected", o.expected},
              {"tolerance", c.tolerance},
              {"deviation", num_json(o.deviation)},
              {"pass", res.pass},
              {"config", serialize_config(c)}};
    res.summary_json = s.dump(2) + "\n";
    if (field_out) *field_out = std::move(o.field);
    return res;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& c) { return run_impl(c, nullptr); }

RunResult run_and_write(const ExperimentConfig& c)
{
    std::optional<SpectralField> field;
    RunResult r = run_impl(c, &field);
    std::error_code ec;
    std::filesystem::create_directories(c.out, ec);
    if (ec) throw Error(Code::IO, "cannot create output directory '" + c.out + "': " + ec.message());
    auto write = [&](const std::string& name, const std::string& body) {
        std::string path = (std::filesystem::path(c.out) / name).string();
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error(Code::IO, "cannot open " + path);
        os << body;
        if (!os) throw Error(Code::IO, "write failed for " + path);
    };
    write("series.csv", r.csv);
    write("summary.json", r.summary_json);
    if (c.field && field) write_binary(*field, (std::filesystem::path(c.out) / "field.bin").string());
    return r;
}

}  // namespace mgt
