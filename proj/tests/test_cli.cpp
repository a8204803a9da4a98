#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dbarlab/cli_runner.hpp"
#include "dbarlab/config.hpp"
#include "dbarlab/io.hpp"

namespace fs = std::filesystem;
using namespace dbarlab;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dbarlab_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string str(const std::string& name = "") const { return (path / name).string(); }
};

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int rc = run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

}  // namespace

TEST_CASE("config parsing is strict") {
    CHECK_THROWS_AS(parse_config_text("[grid]\nbogus = 1\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("[nosuch]\nR = 1\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("[grid]\nR = abc\n"), config_error);
    CHECK_THROWS_AS(parse_config_text("[grid]\nR -> 3\n"), config_error);
    const auto cfg = parse_config_text(
        "# comment\nseed = 3\n[weight]\nkind = \"monomial\"\nm = 4\n[grid]\nR = 3.5\n"
        "h = 0.25\nshape = disk\n[diagnose]\nradii = [1.0, 2.0]\n");
    CHECK(cfg.weight.m == 4.0);
    CHECK(cfg.grid.R == 3.5);
    CHECK(cfg.grid.shape == "disk");
    CHECK(cfg.diagnose.radii.size() == 2);
    CHECK(cfg.seed == 3);
}

TEST_CASE("seed parses at top level") {
    const auto cfg = parse_config_text("seed = 7\n");
    CHECK(cfg.seed == 7);
}

TEST_CASE("flag overrides win over the config file") {
    TempDir tmp;
    write_file(tmp.str("cfg.toml"), "[grid]\nR = 2.0\nh = 0.25\n");
    std::string out;
    const int rc = run({"eigs", "--config", tmp.str("cfg.toml"), "--grid.R=1.5",
                        "--eigs.k=4", "--output.directory=" + tmp.str("out"), "--no-cache"},
                       &out);
    CHECK(rc == 0);
    const std::string meta = read_file(tmp.str("out/eigs_meta.json"));
    const auto j = json::parse(meta);
    // R=1.5, h=0.25 square grid has 11x11=121 interior points
    CHECK(j["n"] == 121);
}

TEST_CASE("malformed config exits 1 with a structured error") {
    TempDir tmp;
    write_file(tmp.str("bad.toml"), "[grid]\nR = \n");
    std::string err;
    const int rc = run({"eigs", "--config", tmp.str("bad.toml")}, nullptr, &err);
    CHECK(rc == 1);
    const auto j = json::parse(err);
    CHECK(j["error"] == "config");
    CHECK_FALSE(fs::exists("out/eigs.csv"));
}

TEST_CASE("unknown command exits 1") {
    std::string err;
    CHECK(run({"frobnicate"}, nullptr, &err) == 1);
    CHECK(json::parse(err)["error"] == "config");
}

TEST_CASE("eigs command writes CSV and caches bit-identically") {
    TempDir tmp;
    const std::vector<std::string> base{
        "eigs", "--grid.R=2.0", "--grid.h=0.2", "--eigs.k=6",
        "--output.directory=" + tmp.str("out")};
    ::setenv("DBARLAB_CACHE_DIR", tmp.str("cache").c_str(), 1);
    CHECK(run(base) == 0);
    const std::string first = read_file(tmp.str("out/eigs.csv"));
    CHECK(first.rfind("index,lambda,residual,converged", 0) == 0);

    // second run hits the cache and reproduces the payload byte-for-byte
    std::string out;
    CHECK(run(base, &out) == 0);
    CHECK(out.find("cache hit") != std::string::npos);
    CHECK(read_file(tmp.str("out/eigs.csv")) == first);

    // --no-cache recomputes the same numbers (determinism)
    std::vector<std::string> nocache = base;
    nocache.push_back("--no-cache");
    CHECK(run(nocache) == 0);
    CHECK(read_file(tmp.str("out/eigs.csv")) == first);
    ::unsetenv("DBARLAB_CACHE_DIR");
}

TEST_CASE("solve command emits report and field") {
    TempDir tmp;
    const int rc = run({"solve", "--grid.R=3.0", "--grid.h=0.2", "--solve.trials=20",
                        "--output.directory=" + tmp.str("out")});
    CHECK(rc == 0);
    const auto j = json::parse(read_file(tmp.str("out/solve.json")));
    CHECK(j["residual_rel"].get<double>() <= 1e-10);
    CHECK(j["weighted_norm_sq"].get<double>() ==
          doctest::Approx(M_PI / 4).epsilon(0.05));
    CHECK(read_file(tmp.str("out/u.csv")).rfind("x,y,re,im", 0) == 0);
}

TEST_CASE("solve accepts a right-hand side from CSV") {
    TempDir tmp;
    // reuse an exported field as input: u from one solve becomes f (x,y,re,im)
    CHECK(run({"solve", "--grid.R=2.5", "--grid.h=0.25", "--solve.trials=0",
               "--output.directory=" + tmp.str("a")}) == 0);
    CHECK(run({"solve", "--grid.R=2.5", "--grid.h=0.25", "--solve.trials=0",
               "--solve.f=" + tmp.str("a/u.csv"),
               "--output.directory=" + tmp.str("b")}) == 0);
    const auto j = json::parse(read_file(tmp.str("b/solve.json")));
    CHECK(j["residual_rel"].get<double>() <= 1e-10);
    CHECK(j["f"].get<std::string>() == tmp.str("a/u.csv"));
}

TEST_CASE("diagnose command verdicts and strict mode") {
    TempDir tmp;
    // m=4 on a small grid: Compact via the divergence test, exit 0 with --strict
    CHECK(run({"diagnose", "--grid.R=3.5", "--grid.h=0.2", "--weight.m=4",
               "--diagnose.radii=[1.0,2.0]", "--diagnose.samples_per_ring=4",
               "--output.directory=" + tmp.str("m4"), "--strict"}) == 0);
    auto j4 = json::parse(read_file(tmp.str("m4/diagnose.json")));
    CHECK(j4["verdict"] == "Compact");
    CHECK(fs::exists(tmp.str("m4/mu_profile.dat")));
    CHECK(fs::exists(tmp.str("m4/laplacian_profile.dat")));

    // zero weight: Inconclusive, exit 3 under --strict
    const int n = 41;
    std::ostringstream csv;
    csv << "x,y,phi\n";
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            csv << -5.0 + i * 0.25 << "," << -5.0 + j * 0.25 << ",0\n";
    write_file(tmp.str("zero.csv"), csv.str());
    const int rc = run({"diagnose", "--grid.R=3.0", "--grid.h=0.25",
                        "--weight.kind=tabulated", "--weight.table_path=" + tmp.str("zero.csv"),
                        "--diagnose.radii=[1.0,1.5]", "--diagnose.samples_per_ring=4",
                        "--output.directory=" + tmp.str("z"), "--strict"});
    CHECK(rc == 3);
    auto jz = json::parse(read_file(tmp.str("z/diagnose.json")));
    CHECK(jz["verdict"] == "Inconclusive");
}

TEST_CASE("scan-mu writes profile artifacts") {
    TempDir tmp;
    CHECK(run({"scan-mu", "--grid.R=3.0", "--grid.h=0.2", "--weight.m=4",
               "--diagnose.radii=[1.0,1.8]", "--diagnose.samples_per_ring=4",
               "--output.directory=" + tmp.str("out")}) == 0);
    const auto j = json::parse(read_file(tmp.str("out/scan_mu.json")));
    CHECK(j["points"].size() == 2);
    CHECK(j["slope"].get<double>() > 0.0);
}

TEST_CASE("worker count does not change the scan") {
    TempDir tmp;
    const std::vector<std::string> base{
        "scan-mu", "--grid.R=3.0", "--grid.h=0.2", "--weight.m=4",
        "--diagnose.radii=[1.0,1.8]", "--diagnose.samples_per_ring=8"};
    auto with = [&](const std::string& out, const std::string& extra) {
        std::vector<std::string> a = base;
        a.push_back("--output.directory=" + tmp.str(out));
        if (!extra.empty()) a.push_back(extra);
        return run(a);
    };
    CHECK(with("w1", "") == 0);
    CHECK(with("w3", "--workers=3") == 0);
    CHECK(read_file(tmp.str("w1/mu_profile.dat")) == read_file(tmp.str("w3/mu_profile.dat")));
    CHECK(run({"scan-mu", "--workers=0"}) == 1);  // rejected before any work
}

TEST_CASE("report merges artifacts and is idempotent") {
    TempDir tmp;
    const std::string out = tmp.str("out");
    CHECK(run({"eigs", "--grid.R=2.0", "--grid.h=0.2", "--eigs.k=4",
               "--output.directory=" + out, "--no-cache"}) == 0);
    CHECK(run({"solve", "--grid.R=2.0", "--grid.h=0.2", "--solve.trials=5",
               "--output.directory=" + out}) == 0);
    CHECK(run({"report", "--output.directory=" + out}) == 0);
    const std::string first = read_file(tmp.str("out/report.json"));
    const auto j = json::parse(first);
    CHECK(j.contains("eigs"));
    CHECK(j.contains("solve"));
    CHECK(run({"report", "--output.directory=" + out}) == 0);
    CHECK(read_file(tmp.str("out/report.json")) == first);  // byte-identical rerun
}

TEST_CASE("report on an empty directory exits 1 listing what is missing") {
    TempDir tmp;
    std::string err;
    const int rc = run({"report", "--output.directory=" + tmp.str("empty")}, nullptr, &err);
    CHECK(rc == 1);
    const auto j = json::parse(err);
    CHECK(j["error"] == "missing_artifacts");
    CHECK(j["missing"].size() == 3);
}

TEST_CASE("built binary honors the exit-code contract") {
    const char* bin = std::getenv("DBARLAB_BIN");
    if (!bin) return;  // only meaningful under ctest
    TempDir tmp;
    const std::string cmd = std::string(bin) + " eigs --grid.R=bad 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(rc) == 1);
}
