#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mgt/cli_runner.hpp"
#include "mgt/error.hpp"
#include "mgt/model_rates.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mgt;

namespace {

std::string config_error_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        if (e.code() == Code::Config) return e.what();
        return std::string("wrong code: ") + code_name(e.code());
    }
    return "no error";
}

std::vector<std::vector<std::string>> split_csv(const std::string& csv)
{
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(csv);
    std::string line;
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("minimal config gets defaults")
{
    auto c = parse_config_text("preset = roots\ntau = 0.5\nbeta = 1\n");
    CHECK(c.preset == Preset::Roots);
    CHECK(c.params.tau == 0.5);
    CHECK(c.params.beta == 1.0);
    CHECK(c.seed == 42);
    CHECK(c.jobs == 1);
    CHECK(c.tolerance == 1e-12);
    auto d = parse_config_text("preset = kernel-check\n");
    CHECK(d.params.tau == 0.5);
    CHECK(d.params.beta == 1.0);
    CHECK(d.taus == std::vector<double>{0.5});
}

TEST_CASE("conservative and non-dissipative parameters are config errors")
{
    auto msg = config_error_of([] { parse_config_text("preset = roots\ntau = 1\nbeta = 1\n"); });
    CHECK(msg.find("params.tau") != std::string::npos);
    CHECK(msg.find("ConservativeCase") != std::string::npos);
    msg = config_error_of([] { parse_config_text("preset = roots\ntau = 2\nbeta = 1\n"); });
    CHECK(msg.find("params.tau") != std::string::npos);
}

TEST_CASE("override precedence")
{
    const std::string text = "preset = linear-decay\np = 3\nn = 1\n[linear-decay]\nn = 2\n[rates]\nn = 3\n";
    ConfigBuilder b;
    b.load_text(text);
    CHECK(b.build().p == 3.0);
    CHECK(b.build().n == 2);
    b.set("p", "2");
    CHECK(b.build().p == 2.0);
    b.set_preset("rates");
    CHECK(b.build().preset == Preset::Rates);
    CHECK(b.build().n == 3);
}

TEST_CASE("config errors carry a field path")
{
    CHECK(config_error_of([] { parse_config_text("preset = roots\nbogus = 1\n"); }).find("unknown key 'bogus'") !=
          std::string::npos);
    CHECK(config_error_of([] { parse_config_text("[nope]\n"); }).find("line 1") != std::string::npos);
    CHECK(config_error_of([] { parse_config_text("[roots]\npreset = rates\n"); }).find("top level") !=
          std::string::npos);
    CHECK(config_error_of([] { parse_config_text("preset = roots\ntau = abc\n"); }).find("tau") != std::string::npos);
    CHECK(config_error_of([] { parse_config_text("tau = 0.5\n"); }).find("preset") != std::string::npos);
    CHECK(config_error_of([] { parse_config_text("preset = fps-check\nN = 100\n"); }).find("grid.N") !=
          std::string::npos);
    CHECK(config_error_of([] { parse_config_text("preset = semilinear-decay\nn = 2\n"); }).find("inadmissible") !=
          std::string::npos);
    CHECK(config_error_of([] { parse_config_text("preset = solution-limit\nn = 2\n"); }).find("n:") !=
          std::string::npos);
    CHECK(config_error_of([] {
              ConfigBuilder b;
              b.load_file("/nonexistent/mgt.cfg");
          }).find("cannot read") != std::string::npos);
    ConfigBuilder b;
    CHECK(config_error_of([&] { b.set("nonsense", "1"); }).find("--nonsense") != std::string::npos);
}

TEST_CASE("serialize and parse round trip")
{
    const std::vector<std::string> inputs = {
        "preset = roots\n",
        "preset = singular-limit\nprepared = yes\ntaus = 0.25, 0.125,0.0625,0.03125\n# comment\n",
        "[fps-check]\ntau=0.3\nbeta = 1.7\ncenter = 1, 2\nfield = true\n",
        "preset = linear-decay\nn = 2\nwindow_lo = 200\nfit = power-times-log\n",
    };
    for (const auto& x : inputs) {
        auto norm = normalize_config(x);
        CHECK(serialize_config(parse_config_text(x)) == norm);
        CHECK(normalize_config(norm) == norm);
    }
    auto c = parse_config_text("preset = rates\ntau = 0.1\n");
    CHECK(serialize_config(c).rfind("[rates]\ntau = 0.1\n", 0) == 0);
}

TEST_CASE("forced failure through zero tolerance")
{
    auto c = parse_config_text("preset = roots\nsamples = 50\ntolerance = 0\n");
    auto r = run_experiment(c);
    CHECK(r.exit_code == 2);
    CHECK_FALSE(r.pass);
    c.tolerance = 1e-12;
    CHECK(run_experiment(c).exit_code == 0);
}

TEST_CASE("runs are byte reproducible")
{
    auto c = parse_config_text("preset = roots\nsamples = 200\n");
    auto a = run_experiment(c), b = run_experiment(c);
    CHECK(a.csv == b.csv);
    CHECK(a.summary_json == b.summary_json);
    auto k = parse_config_text("preset = kernel-check\nt_hi = 1\n");
    CHECK(run_experiment(k).csv == run_experiment(k).csv);
}

TEST_CASE("rates table matches the rate functions")
{
    for (int n : {1, 2, 3, 5}) {
        auto c = parse_config_text("preset = rates\nn = " + std::to_string(n) + "\ns = 0.5\n");
        auto r = run_experiment(c);
        CHECK(r.exit_code == 0);
        auto rows = split_csv(r.csv);
        CHECK(rows[0] == std::vector<std::string>{"t", "D", "F", "g_tilde", "h"});
        for (std::size_t i = 1; i < rows.size(); ++i) {
            double t = std::stod(rows[i][0]);
            if (rows[i][1] != "nan") CHECK(std::stod(rows[i][1]) == rate_D(n, t));
            CHECK(std::stod(rows[i][2]) == rate_F(1.0, n, 0.5, t));
            if (n >= 2) CHECK(std::stod(rows[i][3]) == rate_g_tilde(n, 0.5, t));
            CHECK(std::stod(rows[i][4]) == rate_h(0.5, t));
        }
        auto js = nlohmann::json::parse(r.summary_json);
        CHECK(js["preset"] == "rates");
        CHECK(js["seed"] == 42);
        CHECK(js["metrics"]["table"].size() == rows.size() - 1);
    }
}

TEST_CASE("every CSV starts with a t column")
{
    for (auto p : {Preset::Roots, Preset::KernelCheck, Preset::Rates, Preset::LinearDecay, Preset::Profile,
                   Preset::ApproxRelation, Preset::SingularLimit, Preset::SolutionLimit, Preset::SemilinearDecay,
                   Preset::BlowupScan, Preset::FpsCheck}) {
        auto c = parse_config_text(std::string("preset = ") + preset_name(p) + "\n");
        CHECK(preset_from_name(preset_name(p)) == p);
        CHECK(serialize_config(c).rfind(std::string("[") + preset_name(p) + "]", 0) == 0);
    }
    auto r = run_experiment(parse_config_text("preset = fps-check\nN = 256\n"));
    CHECK(r.csv.rfind("t,", 0) == 0);
}

TEST_CASE("blow-up scan reports the case and bracket")
{
    auto c = parse_config_text("preset = blowup-scan\nN = 128\nT = 100\n");
    auto r = run_experiment(c);
    auto js = nlohmann::json::parse(r.summary_json);
    CHECK(js["metrics"]["status"] == "blowup");
    CHECK(js["metrics"]["case"] == "blowup");
    REQUIRE(js["metrics"]["bracket"].is_array());
    CHECK(js["metrics"]["bracket"][0].get<double>() < js["metrics"]["bracket"][1].get<double>());
    CHECK(r.exit_code == 0);
}

TEST_CASE("artifacts are written to the output directory")
{
    auto dir = std::filesystem::temp_directory_path() / "mgt_cli_runner_test";
    std::filesystem::remove_all(dir);
    auto c = parse_config_text("preset = fps-check\nN = 256\nfield = true\nout = " + dir.string() + "\n");
    auto r = run_and_write(c);
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(dir / "series.csv"));
    CHECK(std::filesystem::exists(dir / "summary.json"));
    CHECK(std::filesystem::file_size(dir / "field.bin") == 32 + 256 * 8);
    std::ifstream is(dir / "summary.json");
    auto js = nlohmann::json::parse(is);
    CHECK(js["pass"] == true);
    CHECK(normalize_config(js["config"].get<std::string>()) == serialize_config(c));
}
