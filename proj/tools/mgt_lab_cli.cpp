// Command-line front end; talks to the library only through mgt_lab.h.
#include "mgt_lab.h"

#include "CLI11.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace {

int fail_config(const char* what)
{
    std::fprintf(stderr, "mgt-lab: %s\n", what);
    return 1;
}

bool check(mgt_status s)
{
    if (s == MGT_OK) return true;
    std::fprintf(stderr, "mgt-lab: %s\n", mgt_last_error());
    return false;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Desk-scale experiments for the Moore-Gibson-Thompson equation"};
    std::string preset, config_file;
    std::vector<std::string> sets;
    bool print_config = false;

    app.add_option("preset", preset,
                   "roots | kernel-check | rates | linear-decay | profile | approx-relation | singular-limit | "
                   "solution-limit | semilinear-decay | blowup-scan | fps-check");
    app.add_option("--config", config_file, "key = value file with optional [preset] sections")->check(CLI::ExistingFile);
    // Shorthand flags map one-to-one onto config keys.
    const std::vector<std::pair<std::string, std::string>> shorthand = {
        {"tau", "relaxation time tau"}, {"beta", "diffusivity beta"}, {"n", "space dimension"},
        {"s", "Sobolev order"},         {"p", "nonlinearity power"}, {"T", "final time"},
        {"out", "output directory"},    {"jobs", "sweep worker threads"}, {"seed", "random seed"},
    };
    std::vector<std::string> values(shorthand.size());
    for (std::size_t i = 0; i < shorthand.size(); ++i)
        app.add_option("--" + shorthand[i].first, values[i], shorthand[i].second);
    app.add_option("--set", sets, "any config key as key=value (repeatable)");
    app.add_flag("--print-config", print_config, "print the normalized config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    mgt_config* cfg = nullptr;
    if (!check(mgt_config_create(&cfg))) return 1;
    struct Guard {
        mgt_config* c;
        ~Guard() { mgt_config_destroy(c); }
    } guard{cfg};

    if (!config_file.empty() && !check(mgt_config_load_file(cfg, config_file.c_str()))) return 1;
    if (!preset.empty() && !check(mgt_config_set_preset(cfg, preset.c_str()))) return 1;
    for (std::size_t i = 0; i < shorthand.size(); ++i)
        if (!values[i].empty() && !check(mgt_config_set(cfg, shorthand[i].first.c_str(), values[i].c_str()))) return 1;
    for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) return fail_config(("--set expects key=value, got '" + kv + "'").c_str());
        if (!check(mgt_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()))) return 1;
    }

    std::size_t need = 0;
    if (!check(mgt_config_serialize(cfg, nullptr, 0, &need))) return 1;
    if (print_config) {
        std::string buf(need, '\0');
        if (!check(mgt_config_serialize(cfg, buf.data(), buf.size(), &need))) return 1;
        std::fputs(buf.c_str(), stdout);
        return 0;
    }

    int exit_code = 1;
    if (!check(mgt_run(cfg, &exit_code))) return 1;
    std::printf("%s\n", exit_code == 0 ? "pass" : "fail");
    return exit_code;
}
