#include "hfclt/commands.hpp"
#include "hfclt/error.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

using namespace hfclt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = HFCLT_DATA_DIR;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("hfclt_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunConfig config_for(const std::string& density, const fs::path& out) {
    RunConfig c;
    c.densities = {kData / density};
    c.out = out;
    return c;
}

int run(const std::string& cmd, const RunConfig& c) {
    std::ostringstream log;
    return run_command(cmd, c, log);
}

} // namespace

TEST_CASE("window parsing") {
    CHECK(parse_window("20:200") == std::pair<std::size_t, std::size_t>{20, 200});
    CHECK_THROWS_AS((void)parse_window("20"), Error);
    CHECK_THROWS_AS((void)parse_window("a:b"), Error);
    CHECK_THROWS_AS((void)parse_window("20:10"), Error);
}

TEST_CASE("config loading") {
    const auto dir = scratch("config");
    fs::copy_file(kData / "quartic025.json", dir / "q.json");
    std::ofstream(dir / "cfg.json") << R"({"densities": ["q.json"], "n_max": 50, "dim": 256,
        "a_grid": [0.9, 0.95], "window": "10:40", "reps": 20000, "seed": 9,
        "format": "json", "slope_tol": 0.2})";
    const auto c = load_config(dir / "cfg.json");
    REQUIRE(c.densities.size() == 1);
    CHECK(c.densities[0] == dir / "q.json");
    CHECK(c.n_max == 50);
    CHECK(c.dim == 256);
    CHECK(c.a_grid == std::vector<double>{0.9, 0.95});
    CHECK(c.window == std::pair<std::size_t, std::size_t>{10, 40});
    CHECK(c.reps == 20000);
    CHECK(c.seed == 9);
    CHECK(c.format == "json");
    CHECK(c.slope_tol == 0.2);
    CHECK_NOTHROW(validate(c));

    std::ofstream(dir / "arr.json") << R"({"densities": ["q.json"], "window": [5, 30]})";
    CHECK(load_config(dir / "arr.json").window == std::pair<std::size_t, std::size_t>{5, 30});

    std::ofstream(dir / "bad.json") << R"({"densities": ["q.json"], "n_max": "many"})";
    CHECK_THROWS_AS((void)load_config(dir / "bad.json"), Error);
    CHECK_THROWS_AS((void)load_config(dir / "missing.json"), Error);
}

TEST_CASE("validation") {
    auto c = config_for("quartic025.json", ".");
    CHECK_NOTHROW(validate(c));
    auto bad = c;
    bad.n_max = 1;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = c;
    bad.a_grid = {1.0};
    CHECK_THROWS_AS(validate(bad), Error);
    bad = c;
    bad.reps = 10;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = c;
    bad.format = "xml";
    CHECK_THROWS_AS(validate(bad), Error);
    bad = c;
    bad.densities.clear();
    CHECK_THROWS_AS(validate(bad), Error);
    bad = c;
    bad.densities = {kData / "nope.json"};
    CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("check") {
    const auto out = scratch("check");
    CHECK(run("check", config_for("gauss.json", out)) == kExitOk);
    auto j = json::parse(slurp(out / "check.json"));
    CHECK(j[0]["gaussian"] == true);
    CHECK(j[0]["h2b"]["verdict"] == "n/a");

    CHECK(run("check", config_for("quartic025.json", out)) == kExitOk);
    j = json::parse(slurp(out / "check.json"));
    CHECK(j[0]["K"] == 4);
    CHECK(j[0]["N"] == 4);
    CHECK(j[0]["r"] == 3);
    CHECK(j[0]["n0"] == 4);
    CHECK(j[0]["h2b"]["verdict"] == "pass");
    CHECK(j[0]["a_phi"].get<double>() == doctest::Approx(0.840896).epsilon(1e-6));

    CHECK(run("check", config_for("quartic050.json", out)) == kExitHypothesis);
    j = json::parse(slurp(out / "check.json"));
    CHECK(j[0]["h2b"]["verdict"] == "fail");

    CHECK(run("check", config_for("negative.json", out)) == kExitNotADensity);
    j = json::parse(slurp(out / "check.json"));
    CHECK(j[0].contains("witness"));
}

TEST_CASE("run") {
    const auto out = scratch("run");
    auto c = config_for("quartic025.json", out);
    CHECK(run("run", c) == kExitOk);
    const auto s = json::parse(slurp(out / "summary.json"));
    CHECK(s["slope"].get<double>() == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(s["slope_target"].get<double>() == -1.0);
    CHECK(s["er_violations"] == 0);
    CHECK(s["n0"] == 4);
    CHECK(slurp(out / "trajectory.csv").rfind("n,a_n,chi2,envelope,tail_dropped\n", 0) == 0);
    CHECK(slurp(out / "loglog.csv").rfind("log_n,log_chi2\n", 0) == 0);

    SUBCASE("Gaussian") {
        const auto gout = scratch("run_gauss");
        CHECK(run("run", config_for("gauss.json", gout)) == kExitOk);
        const auto g = json::parse(slurp(gout / "summary.json"));
        CHECK(g["slope"].is_null());
        CHECK_FALSE(g["notes"].empty());
    }
    SUBCASE("flagged truncation") {
        auto small = c;
        small.out = scratch("run_small");
        small.dim = 16;
        small.n_max = 40;
        small.window = {20, 40};
        CHECK(run("run", small) == kExitFlaggedTruncation);
    }
    SUBCASE("slope miss") {
        auto tight = c;
        tight.out = scratch("run_tight");
        tight.slope_tol = 1e-6;
        CHECK(run("run", tight) == kExitSlopeMiss);
    }
    SUBCASE("round robin") {
        auto rr = c;
        rr.out = scratch("run_rr");
        rr.densities.push_back(kData / "quartic020.json");
        CHECK(run("run", rr) == kExitOk);
    }
    SUBCASE("determinism") {
        const auto again = scratch("run_again");
        auto c2 = c;
        c2.out = again;
        CHECK(run("run", c2) == kExitOk);
        for (const char* f : {"summary.json", "trajectory.csv", "loglog.csv"})
            CHECK(slurp(out / f) == slurp(again / f));
    }
}

TEST_CASE("verify") {
    const auto out = scratch("verify");
    auto c = config_for("quartic025.json", out);
    c.a_grid = {0.5, 0.85, 0.9, 0.95, 0.99};
    CHECK(run("verify", c) == kExitOk);
    const auto csv = slurp(out / "verify.csv");
    CHECK(csv.find("skipped") != std::string::npos);

    c.format = "json";
    CHECK(run("verify", c) == kExitOk);
    for (const auto& row : json::parse(slurp(out / "verify.json")))
        CHECK(row["holds"] == true);

    auto g = config_for("gauss.json", scratch("verify_gauss"));
    CHECK(run("verify", g) == kExitOk);
    CHECK(slurp(g.out / "verify.csv").find("improved_poincare_equality") != std::string::npos);
}

TEST_CASE("oracle") {
    auto c = config_for("quartic025.json", scratch("oracle"));
    c.reps = 20000;
    CHECK(run("oracle", c) == kExitOk);
    CHECK(fs::exists(c.out / "oracle.csv"));
    c.flip_q = true;
    CHECK(run("oracle", c) == kExitOracleDisagreement);
}

TEST_CASE("errors map to exit codes") {
    const auto dir = scratch("errors");
    std::ofstream(dir / "plain") << "x";
    auto c = config_for("quartic025.json", dir / "plain" / "sub");
    CHECK(run("check", c) == kExitIo);
    CHECK(run("bogus", config_for("quartic025.json", scratch("bogus"))) == kExitIo);
}

TEST_CASE("atomic write") {
    const auto dir = scratch("atomic");
    write_atomic(dir / "a.txt", "hello\n");
    CHECK(slurp(dir / "a.txt") == "hello\n");
    write_atomic(dir / "a.txt", "again\n");
    CHECK(slurp(dir / "a.txt") == "again\n");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir))
        ++files;
    CHECK(files == 1);
}
