#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "platcomp/cli.hpp"

using namespace platcomp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
    json j() const { return json::parse(out); }
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "platcomp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("platcomp_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("pregenai") {
    auto r = cli({"pregenai", "--alpha", "0.5", "--gamma", "0.9", "--cost", "0.1"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.j()["W_star"].get<double>() == doctest::Approx(0.0));
    CHECK(r.j()["Pi_star"].get<double>() == doctest::Approx(0.9));
    r = cli({"pregenai", "--alpha", "0.5", "--gamma", "0.5", "--cost", "1.0"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.j()["W_star"].get<double>() == doctest::Approx(0.0));
    CHECK(r.j()["Pi_star"].get<double>() == doctest::Approx(0.25));
    r = cli({"pregenai", "--alpha", "0.5", "--gamma", "0.5", "--cost", "1.0", "--w", "0.5"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.j()["beta_h"].get<double>() == doctest::Approx(1.0));
    CHECK(cli({"pregenai", "--cost", "-1"}).code == kExitInvalidInput);
}

TEST_CASE("solve and classify the two-level example") {
    auto r = cli({"classify", "--two-level", "0.2", "--v-bar", "0.16"});
    REQUIRE(r.code == kExitOk);
    auto j = r.j();
    CHECK(j["classification"] == "Interior");
    CHECK(j["scheme"]["w"].get<double>() == doctest::Approx(0.148334187).epsilon(1e-8));
    CHECK(j["quantities"]["r_bar"].get<double>() == doctest::Approx(0.708641975).epsilon(1e-8));
    CHECK_FALSE(j.contains("q"));
    r = cli({"classify", "--two-level", "0.2", "--v-bar", "0.16", "--w", "0.3"});
    CHECK(r.j()["classification"] == "Nonexistent");
    r = cli({"classify", "--two-level", "0.2", "--v-bar", "0.16", "--w", "0.3", "--assume-large-w"});
    CHECK(r.j()["classification"] == "Interior");
    CHECK(r.j()["assumed_large_w"] == true);
    r = cli({"classify", "--two-level", "0.4", "--v-bar", "0.3", "--w", "0"});
    CHECK(r.j()["classification"] == "PureAI");
}

TEST_CASE("solve writes a solution that verify accepts") {
    const fs::path dir = scratch("verify");
    auto r = cli({"--out", dir.string(), "solve", "--two-level", "0.2", "--v-bar", "0.18"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.j()["q"].size() == 1000);
    REQUIRE(fs::exists(dir / "solve.json"));
    REQUIRE(fs::exists(dir / "config.json"));
    r = cli({"verify", "--solution", (dir / "solve.json").string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.j()["max"].get<double>() <= 1e-8);

    std::ifstream in(dir / "solve.json");
    json sol;
    in >> sol;
    sol["beta"][900] = 0.9;
    std::ofstream(dir / "bad.json") << sol.dump();
    r = cli({"verify", "--solution", (dir / "bad.json").string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.j()["consistency"].get<double>() > 1e-3);
    std::ofstream(dir / "broken.json") << "{\"params\": 3}";
    CHECK(cli({"verify", "--solution", (dir / "broken.json").string()}).code == kExitInvalidInput);
}

TEST_CASE("density files as input") {
    const fs::path dir = scratch("files");
    std::ofstream(dir / "p.csv") << "x,value\n0.25,1\n0.75,1\n";
    std::ofstream(dir / "g.csv") << "x,value\n0.25,1.8\n0.75,0.2\n";
    auto r = cli({"classify", "--p", (dir / "p.csv").string(), "--g", (dir / "g.csv").string(), "--gamma", "0.85",
                  "--cost", "0.15", "--v-bar", "0.16"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.j()["scheme"]["w"].get<double>() == doctest::Approx(0.148334187).epsilon(1e-8));
    CHECK(cli({"classify", "--p", (dir / "p.csv").string(), "--v-bar", "0.16"}).code == kExitInvalidInput);
    CHECK(cli({"classify", "--p", (dir / "missing.csv").string(), "--g", (dir / "g.csv").string(), "--v-bar", "0.16"})
              .code == kExitInvalidInput);
}

TEST_CASE("curve") {
    auto r = cli({"curve", "--two-level", "0.2", "--v-min", "0.16", "--v-max", "0.3", "--points", "15"});
    REQUIRE(r.code == kExitOk);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 16);
    CHECK(rows[0][0] == "v_bar");
    CHECK(std::stod(rows[1][1]) == doctest::Approx(0.148334187).epsilon(1e-7));
    CHECK(std::stod(rows[1][2]) == doctest::Approx(0.848434787).epsilon(1e-7));
    CHECK(std::stod(rows[1][3]) == doctest::Approx(0.783248865).epsilon(1e-7));
    for (std::size_t i = 2; i < rows.size(); ++i) CHECK(std::stod(rows[i][2]) <= std::stod(rows[i - 1][2]) + 1e-9);
    CHECK(rows.back()[4] == "NoCompensationEquivalent");

    r = cli({"curve", "--two-level", "0.4", "--points", "10"});
    REQUIRE(r.code == kExitOk);
    const auto flat = csv_rows(r.out);
    bool saw_pure = false;
    for (std::size_t i = 1; i < flat.size(); ++i)
        if (flat[i][4] == "PureAI") {
            saw_pure = true;
            CHECK(std::stod(flat[i][3]) == doctest::Approx(0.806380803).epsilon(1e-7));
        }
    CHECK(saw_pure);
    CHECK(cli({"curve", "--two-level", "0.2", "--points", "1"}).code == kExitInvalidInput);
}

TEST_CASE("optimize and twolevel") {
    auto r = cli({"optimize", "--two-level", "0.2"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.j()["w_star"].get<double>() == doctest::Approx(0.0907).epsilon(0.01));
    CHECK(r.j()["no_compensation"] == false);
    r = cli({"twolevel", "--g-low", "0.2", "--v-bar", "0.16"});
    REQUIRE(r.code == kExitOk);
    auto j = r.j();
    CHECK(j["g_star"].get<double>() == doctest::Approx(0.2718368).epsilon(1e-6));
    CHECK(j["v0"].get<double>() == doctest::Approx(0.2811925).epsilon(1e-6));
    CHECK(j["at"]["Pi"].get<double>() == doctest::Approx(0.783248865).epsilon(1e-8));
    r = cli({"twolevel", "--g-low", "0.4"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.j()["regime"] == "pure_genai_without_compensation");
    CHECK(r.j()["w_min"].get<double>() == doctest::Approx(0.0689146).epsilon(1e-6));
    CHECK(cli({"twolevel"}).code == kExitInvalidInput);
    CHECK(cli({"twolevel", "--g-low", "1.5"}).code == kExitInvalidInput);
}

TEST_CASE("simulate") {
    const fs::path dir = scratch("simulate");
    auto r = cli({"--seed", "1", "--out", dir.string(), "simulate", "--v-bar", "0.110", "--w", "0.150"});
    REQUIRE(r.code == kExitOk);
    const double R = r.j()["R"].get<double>();
    CHECK(R == doctest::Approx(0.862).epsilon(0.01));
    CHECK(fs::exists(dir / "histogram.csv"));
    std::ifstream cfg_in(dir / "config.json");
    json side;
    cfg_in >> side;
    CHECK(side["seed"] == 1);
    CHECK(side["command"] == "simulate");
    auto again = cli({"--seed", "1", "simulate", "--v-bar", "0.110", "--w", "0.150"});
    CHECK(again.out == r.out);
    CHECK(cli({"simulate", "--n-agents", "5"}).code == kExitInvalidInput);
}

TEST_CASE("config file with flag override") {
    const fs::path dir = scratch("config");
    std::ofstream(dir / "c.json") << R"({"two_level": 0.2, "v_bar": 0.16, "w": 0.3})";
    auto r = cli({"--config", (dir / "c.json").string(), "classify"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.j()["classification"] == "Nonexistent");
    r = cli({"--config", (dir / "c.json").string(), "classify", "--w", "0.148334187330896"});
    CHECK(r.j()["classification"] == "Interior");
    std::ofstream(dir / "bad.json") << "{not json";
    CHECK(cli({"--config", (dir / "bad.json").string(), "classify"}).code == kExitInvalidInput);
    std::ofstream(dir / "typed.json") << R"({"two_level": "x", "v_bar": 0.16})";
    CHECK(cli({"--config", (dir / "typed.json").string(), "classify"}).code == kExitInvalidInput);
}

TEST_CASE("bad invocations") {
    CHECK(cli({}).code == kExitInvalidInput);
    CHECK(cli({"nonsense"}).code == kExitInvalidInput);
    CHECK(cli({"classify", "--two-level", "0.2"}).code == kExitInvalidInput);
    CHECK(cli({"classify", "--two-level", "0.2", "--v-bar", "0.1"}).code == kExitInvalidInput);
    CHECK(cli({"classify", "--two-level", "0.2", "--v-bar", "abc"}).code == kExitInvalidInput);
    CHECK(cli({"--grid-cells", "7", "classify", "--two-level", "0.2", "--v-bar", "0.16"}).code == kExitInvalidInput);
}

TEST_CASE("multiperiod through the installed binary") {
    const fs::path dir = scratch("multi");
    const std::string cmd = std::string("\"") + PLATCOMP_BINARY + "\" --seed 2 --out \"" + dir.string() +
                            "\" multiperiod --periods 3 --n-agents 4000 > \"" + (dir / "stdout.csv").string() + "\"";
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream in(dir / "summary.json");
    json summary;
    in >> summary;
    CHECK(summary["periods"] == 3);
    CHECK(summary.contains("collapse"));
    CHECK(fs::exists(dir / "histogram_t3.csv"));
    std::ifstream csv(dir / "stdout.csv");
    std::stringstream body;
    body << csv.rdbuf();
    CHECK(csv_rows(body.str()).size() == 4);
}
