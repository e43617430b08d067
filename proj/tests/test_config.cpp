#include "hes1/config.hpp"
#include "hes1/tikhonov.hpp"

#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace hes1;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string out;
};

/// Runs the CLI with stderr discarded.
Run cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " HES1_CLI_PATH " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("hes1_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool same(const ModelParams& a, const ModelParams& b) {
    return params_to_json(a) == params_to_json(b) && a.r0() == b.r0();
}

} // namespace

TEST_CASE("presets round-trip through JSON") {
    const auto dir = scratch("presets");
    for (const auto& name : preset_names()) {
        const auto p = preset(name);
        CHECK(same(ModelParams(params_from_json(params_to_json(p))), p));
        const auto path = (dir / (name + ".json")).string();
        save_params(path, p);
        CHECK(same(load_params(path), p));
        CHECK(same(resolve_params(name), p));
        CHECK(same(resolve_params(path), p));
    }
    const auto hill = ModelParams::hill(5, 10.0, 1e-6, 1, 1);
    const auto j = params_to_json(hill);
    CHECK(j.contains("hill_r0"));
    CHECK_FALSE(j.contains("k"));
    CHECK(same(ModelParams(params_from_json(j)), hill));
    fs::remove_all(dir);
}

TEST_CASE("shipped preset files match the built-in presets") {
    for (const auto& name : preset_names()) {
        const fs::path path = fs::path(HES1_PRESET_DIR) / (name + ".json");
        REQUIRE(fs::exists(path));
        CHECK(same(load_params(path.string()), preset(name)));
    }
}

TEST_CASE("parameter file errors") {
    auto j = params_to_json(preset("par-n3"));
    auto bad = j;
    bad["r0"] = 5.0;
    CHECK_THROWS_WITH_AS(params_from_json(bad), doctest::Contains("r0 is derived"), DomainError);
    bad = j;
    bad["colour"] = 1;
    CHECK_THROWS_AS(params_from_json(bad), DomainError);
    bad = j;
    bad.erase("delta1");
    CHECK_THROWS_WITH_AS(params_from_json(bad), doctest::Contains("missing"), DomainError);
    bad = j;
    bad["n"] = 2.5;
    CHECK_THROWS_AS(params_from_json(bad), DomainError);
    bad = j;
    bad["kk"] = "big";
    CHECK_THROWS_AS(params_from_json(bad), DomainError);
    bad = j;
    bad["k"] = {1.0, 2.0};
    CHECK_THROWS_AS(ModelParams(params_from_json(bad)), DomainError);
    CHECK_THROWS_AS(params_from_json(nlohmann::json::array()), DomainError);

    const auto dir = scratch("badfile");
    std::ofstream(dir / "broken.json") << "{ \"n\": 3, ";
    CHECK_THROWS_WITH_AS(load_params((dir / "broken.json").string()), doctest::Contains("malformed"), DomainError);
    CHECK_THROWS_AS(load_params((dir / "absent.json").string()), DomainError);
    CHECK_THROWS_WITH_AS(resolve_params("par-n4"), doctest::Contains("presets:"), DomainError);
    fs::remove_all(dir);
}

TEST_CASE("rounding to 15 digits") {
    CHECK(round15(0.1 + 0.2) == 0.3);
    CHECK(round15(1.0 / 3.0) == 0.333333333333333);
    const auto j = config_to_json(IntegratorConfig{});
    CHECK(j["method"] == "implicit");
    CHECK(j["t_end"] == 100.0);
}

TEST_CASE("CLI simulate") {
    const auto r = cli("simulate --preset par-n3 --variant classical --t-end 200");
    CHECK(r.status == 0);
    CHECK(r.out.rfind("t,y1,z\n0,0,0\n", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2002);
    // byte-identical across runs
    CHECK(cli("simulate --preset par-n3 --variant classical --t-end 200").out == r.out);

    const auto dir = scratch("simulate");
    CHECK(cli("simulate --preset par-n3 --variant full --t-end 20 --out " + dir.string()).status == 0);
    CHECK(slurp(dir / "simulate_full.csv").rfind("t,x0,x1,x2,y1,y2,z\n", 0) == 0);
    CHECK(cli("simulate --preset par-n3 --t-end 20", "HES1_OUTPUT_DIR=" + dir.string() + "/env").status == 0);
    CHECK(fs::exists(dir / "env" / "simulate_full.csv"));
    fs::remove_all(dir);
}

TEST_CASE("CLI stability, steady state and scan") {
    const auto st = cli("stability --preset par-n5 --variant with-dimers");
    CHECK(st.status == 0);
    CHECK(st.out.find("threshold = unstable_certified") != std::string::npos);
    CHECK(st.out.find("threshold.margin = -0.00773525259") != std::string::npos);

    const auto ss = cli("steady-state --preset par-n3 --variant full");
    CHECK(ss.status == 0);
    CHECK(ss.out.find("x0 = 0.2\n") != std::string::npos);
    CHECK(ss.out.find("y1_root = 1\n") != std::string::npos);

    const auto sc = cli("scan --n 5 --grid r0=2:12:21 --fix eps2=1,delta1=1,delta2=1,k=1e-6");
    CHECK(sc.status == 0);
    CHECK(sc.out.rfind("r0,neg_psi_prime,threshold,verdict,max_real_eigenvalue\n", 0) == 0);
    // first unstable row is r0 = 5.5, one grid cell above the critical value
    const auto first_unstable = sc.out.find("unstable_certified");
    CHECK(sc.out.find("\n5,") < first_unstable);
    CHECK(sc.out.find("\n5.5,") < first_unstable);
    CHECK(sc.out.find("\n6,") > first_unstable);
    CHECK(cli("scan --n 5 --grid r0=2:12:21 --fix eps2=1,delta1=1,delta2=1,k=1e-6").out == sc.out);
}

TEST_CASE("CLI sweep and reproduce") {
    const auto sw = cli("sweep --reduction 'full->with-dimers' --eps 1e-1,1e-2,1e-3 --t-end 20");
    CHECK(sw.status == 0);
    const auto j = nlohmann::json::parse(sw.out);
    CHECK(j.is_array());
    CHECK(j[0]["reduction"] == "full->with-dimers");

    const auto dir = scratch("reproduce");
    const auto r = cli("reproduce --figure fig4 --out " + dir.string());
    CHECK(r.status == 0);
    CHECK(r.out.find("ok") != std::string::npos);
    for (auto v : all_variants) CHECK(fs::exists(dir / ("fig4_" + std::string(to_string(v)) + ".csv")));
    const auto verdict = nlohmann::json::parse(slurp(dir / "fig4_verdict.json"));
    CHECK(verdict["all_match"] == true);
    fs::remove_all(dir);
}

TEST_CASE("CLI exit codes") {
    CHECK(cli("simulate --preset par-n4").status == 1);
    CHECK(cli("simulate --preset par-n3 --rtol 2").status == 1);
    CHECK(cli("simulate --preset par-n3 --bogus").status == 2);
    CHECK(cli("simulate --preset par-n3 --params x.json").status == 2);
    CHECK(cli("frobnicate").status == 2);
    CHECK(cli("scan --n 5 --grid r0").status == 2);
    CHECK(cli("steady-state --preset par-n9 --variant full --params /nonexistent.json").status == 2);
    CHECK(cli("simulate --preset par-n3 --out /proc/forbidden").status == 1);
    CHECK(cli("--version").out == "hes1 0.1.0\n");
}
