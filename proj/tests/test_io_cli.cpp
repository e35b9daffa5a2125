#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "danse/io.hpp"

using namespace danse;
namespace fs = std::filesystem;

#ifndef DANSE_CLI_PATH
#define DANSE_CLI_PATH "danse"
#endif

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("danse_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ostringstream ss;
    ss << std::ifstream(p).rdbuf();
    return ss.str();
}

void write_tiny_config(const fs::path& path, double t_max = 20.0, int n_real = 3) {
    std::ofstream out(path);
    out << R"({
  "L": 41, "L_a": 6, "eta_a": 0.1,
  "W": [2.0], "g": [0.5, 5.0], "L0": [11],
  "dt": 0.05, "t_min": 1.0, "t_max": )"
        << t_max << R"(, "points_per_decade": 8,
  "n_real": )"
        << n_real << R"(, "master_seed": 31415
})";
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DANSE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("run config parsing") {
    const auto dir = fresh_dir("cfg");
    write_tiny_config(dir / "cfg.json");
    const auto cfg = io::load_run_config(dir / "cfg.json");
    CHECK(cfg.base.L == 41);
    CHECK(cfg.base.n_c == doctest::Approx(2.0));  // defaults to L_a / 3
    CHECK(cfg.g_list.size() == 2);
    CHECK(cfg.n_real == 3);
    CHECK(cfg.master_seed == 31415);

    SUBCASE("scalar sweep values are accepted") {
        std::ofstream(dir / "scalar.json") << R"({"W": 2.0, "g": 1.0, "L0": 21})";
        const auto c2 = io::load_run_config(dir / "scalar.json");
        CHECK(c2.W_list == std::vector<double>{2.0});
        CHECK(c2.L0_list == std::vector<int>{21});
    }
    SUBCASE("bad json is a parameter error") {
        std::ofstream(dir / "bad.json") << "{ not json";
        CHECK_THROWS_AS(io::load_run_config(dir / "bad.json"), ParameterError);
    }
    SUBCASE("invalid values are rejected") {
        std::ofstream(dir / "badL.json") << R"({"L": 40})";
        CHECK_THROWS_AS(io::load_run_config(dir / "badL.json"), ParameterError);
        std::ofstream(dir / "badL0.json") << R"({"L": 41, "L0": [44]})";
        CHECK_THROWS_AS(io::load_run_config(dir / "badL0.json"), ParameterError);
    }
    SUBCASE("paper scale overrides") {
        auto c3 = cfg;
        io::apply_paper_scale(c3);
        CHECK(c3.t_max == 1e5);
        CHECK(c3.n_real == 1000);
    }
}

TEST_CASE("trace round trip preserves the spec bit-exactly") {
    const auto dir = fresh_dir("trace");
    io::RunConfig cfg;
    cfg.base.L = 41;
    cfg.base.L_a = 6;
    cfg.t_max = 10.0;
    cfg.n_real = 2;
    const EnsembleSpec spec = io::make_spec(cfg, 2.0, 0.5, 11);
    const auto res = run_ensemble(spec, 1);
    io::write_trace(dir, res.trace);

    const auto back = io::read_trace(dir / (io::trace_stem(2.0, 11, 0.5) + ".csv"));
    CHECK(back.fp == res.trace.fp);
    CHECK(back.t == res.trace.t);
    CHECK(back.p_mean == res.trace.p_mean);
    CHECK(back.p_stderr == res.trace.p_stderr);
    CHECK(fingerprint(back.spec) == fingerprint(res.trace.spec));

    SUBCASE("missing sidecar is an error") {
        fs::remove(dir / (io::trace_stem(2.0, 11, 0.5) + ".json"));
        CHECK_THROWS(io::read_trace(dir / (io::trace_stem(2.0, 11, 0.5) + ".csv")));
    }
}

TEST_CASE("fit and scaled tables round trip") {
    const auto dir = fresh_dir("tables");
    std::vector<FitRow> rows(2);
    rows[0] = {0.5, 2.0, 11, FitResult{23.5, 12.0, 9.1, 1e-3, 5.0, 900.0, 42, true, false}};
    rows[1] = {5.0, 2.0, 11, FitResult{8.25, 0.5, 9.1, 2e-3, 2.0, 900.0, 40, true, false}};
    io::write_fit_table(dir / "fits.csv", rows);
    const auto back = io::read_fit_table(dir / "fits.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].fit.ell_eff == 23.5);
    CHECK(back[1].fit.t2 == 0.5);
    CHECK(back[0].fit.converged);

    std::vector<ScaledPoint> pts{scale_point(5.0, 2.0, 11, 8.25)};
    io::write_scaled_table(dir / "scaled.csv", pts);
    const auto pback = io::read_scaled_table(dir / "scaled.csv");
    REQUIRE(pback.size() == 1);
    CHECK(pback[0].g_tilde == pts[0].g_tilde);
    CHECK(pback[0].L0 == 11);
}

TEST_CASE("cli pipeline: run, rerun determinism, fit, scale, report") {
    const auto dir = fresh_dir("cli");
    write_tiny_config(dir / "cfg.json", 400.0, 6);
    const auto out1 = dir / "out1";
    const auto out2 = dir / "out2";

    REQUIRE(run_cli("run --config " + (dir / "cfg.json").string() + " --out " +
                    out1.string()) == 0);
    REQUIRE(run_cli("run --config " + (dir / "cfg.json").string() + " --out " +
                    out2.string()) == 0);

    const std::string stem = io::trace_stem(2.0, 11, 0.5);
    CHECK(fs::exists(out1 / (stem + ".csv")));
    CHECK(fs::exists(out1 / "manifest.json"));
    // reruns are byte-identical apart from the manifest timestamps
    CHECK(slurp(out1 / (stem + ".csv")) == slurp(out2 / (stem + ".csv")));
    CHECK(slurp(out1 / (stem + ".json")) == slurp(out2 / (stem + ".json")));

    SUBCASE("dry run writes nothing") {
        const auto dry = dir / "dry";
        REQUIRE(run_cli("run --config " + (dir / "cfg.json").string() + " --out " +
                        dry.string() + " --dry-run") == 0);
        CHECK_FALSE(fs::exists(dry / "manifest.json"));
    }
    SUBCASE("fit, scale and report emit their tables") {
        REQUIRE(run_cli("fit --in " + out1.string()) == 0);
        CHECK(fs::exists(out1 / "fits.csv"));
        CHECK(fs::exists(out1 / "fits.json"));
        const auto rows = io::read_fit_table(out1 / "fits.csv");
        CHECK(rows.size() >= 1);

        REQUIRE(run_cli("scale --in " + out1.string()) == 0);
        CHECK(fs::exists(out1 / "scaled.csv"));
        CHECK(fs::exists(out1 / "collapse.csv"));
        CHECK(fs::exists(out1 / "crossovers.csv"));

        const auto rep = dir / "report";
        REQUIRE(run_cli("report --in " + out1.string() + " --out " + rep.string()) == 0);
        CHECK(fs::exists(rep / "fig_survival_vs_g_W2.csv"));
        CHECK(fs::exists(rep / "fig_leff_vs_g_W2.csv"));
    }
}

TEST_CASE("cli error paths") {
    const auto dir = fresh_dir("clierr");
    SUBCASE("missing config file") {
        CHECK(run_cli("run --config " + (dir / "nope.json").string() + " --out " +
                      (dir / "o").string()) == 1);
    }
    SUBCASE("invalid config values") {
        std::ofstream(dir / "bad.json") << R"({"L": 40})";
        CHECK(run_cli("run --config " + (dir / "bad.json").string() + " --out " +
                      (dir / "o").string()) == 1);
    }
    SUBCASE("empty fit directory") {
        fs::create_directories(dir / "empty");
        CHECK(run_cli("fit --in " + (dir / "empty").string()) == 1);
    }
    SUBCASE("numerical failure exits with code 2") {
        std::ofstream(dir / "hot.json") << R"({
  "L": 41, "L_a": 6, "W": [2.0], "g": [500.0], "L0": [3],
  "dt": 0.05, "nl_iters": 1, "t_min": 1.0, "t_max": 5.0,
  "points_per_decade": 4, "n_real": 1, "master_seed": 7
})";
        CHECK(run_cli("run --config " + (dir / "hot.json").string() + " --out " +
                      (dir / "o2").string()) == 2);
    }
}
