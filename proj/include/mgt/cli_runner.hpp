#pragma once

#include "mgt/model_rates.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mgt {

enum class Preset {
    Roots,
    KernelCheck,
    Rates,
    LinearDecay,
    Profile,
    ApproxRelation,
    SingularLimit,
    SolutionLimit,
    SemilinearDecay,
    BlowupScan,
    FpsCheck,
};

const char* preset_name(Preset p);
std::optional<Preset> preset_from_name(const std::string& name);
const std::vector<std::string>& config_keys();

struct ExperimentConfig {
    Preset preset = Preset::Roots;
    ModelParams params;
    int n = 1;
    double m = 1.0;
    double s = 0.0;
    double p = 2.0;
    double T = 1.0;
    double L = 64.0;
    int N = 256;
    std::string profile = "gaussian";
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double width = 1.0;
    double amplitude = 1.0;
    double t_lo = 1.0;
    double t_hi = 1e4;
    int per_decade = 40;
    double window_lo = 1.0;
    double window_hi = 1e4;
    std::string fit = "auto";
    double tolerance = 0.05;
    std::vector<double> taus;
    bool prepared = false;
    double eps = 1e-3;
    double rho = 1.0;
    double margin = 0.05;
    int samples = 10000;
    double oracle_tol = 1e-15;
    bool field = false;
    std::string out = "mgt_out";
    unsigned seed = 42;
    int jobs = 1;
};

// Collects key-value text from files, strings and overrides; build() resolves the preset,
// fills preset defaults and validates. Later sources win: file top level, file section, overrides.
class ConfigBuilder {
public:
    void load_file(const std::string& path);
    void load_text(const std::string& text);
    void set(const std::string& key, const std::string& value);
    void set_preset(const std::string& name);
    ExperimentConfig build() const;

private:
    std::optional<std::string> preset_;
    std::optional<std::string> override_preset_;
    std::map<std::string, std::string> top_;
    std::map<std::string, std::map<std::string, std::string>> sections_;
    std::map<std::string, std::string> overrides_;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& c);
std::string normalize_config(const std::string& text);

struct RunResult {
    int exit_code = 0;  // 0 pass, 2 quantitative fail
    bool pass = false;
    double deviation = 0.0;
    std::string csv;
    std::string summary_json;
};

// Runs the experiment without touching the filesystem.
RunResult run_experiment(const ExperimentConfig& c);

// Runs and writes <out>/series.csv, <out>/summary.json and, when requested, <out>/field.bin.
RunResult run_and_write(const ExperimentConfig& c);

}  // namespace mgt
