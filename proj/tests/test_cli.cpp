#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "ladder/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("ladder_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "ladder");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return ladder::cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

// Runs the same command twice into different files and returns both outputs.
std::pair<std::string, std::string> twice(const std::string& tag, std::vector<std::string> args) {
    std::string out[2];
    for (int i = 0; i < 2; ++i) {
        auto path = scratch() / (tag + std::to_string(i) + ".out");
        std::vector<std::string> a{"--out", path.string()};
        a.insert(a.end(), args.begin(), args.end());
        REQUIRE(run(a) == 0);
        out[i] = slurp(path);
    }
    return {out[0], out[1]};
}

} // namespace

TEST_CASE("census example: a_1.. begins 5, 19") {
    auto path = scratch() / "census.csv";
    REQUIRE(run({"census", "--graph", "path2", "--variant", "L", "--n", "8", "--out", path.string()}) == 0);
    auto text = slurp(path);
    CHECK(text.rfind("variant,n,count\nL,1,5\nL,2,19\n", 0) == 0);
    CHECK(text.find("L,8,51409") != std::string::npos);

    auto manifest = json::parse(slurp(path.string() + ".manifest.json"));
    CHECK(manifest["command"] == "census");
    CHECK(manifest["graph"]["source"] == "path2");
    CHECK(manifest["parameters"]["n"] == "8");
    CHECK(manifest["parameters"]["variant"] == "L");
    CHECK(manifest["seed"] == 1);
    CHECK(manifest["tool_version"] == ladder::kToolVersion);
    CHECK(manifest["outputs"][0] == path.string());
    CHECK(manifest["wall_clock_seconds"].get<double>() >= 0);
}

TEST_CASE("census json carries counts and entropy bounds") {
    auto path = scratch() / "census.json";
    REQUIRE(run({"--format", "json", "census", "--n", "5", "--variant", "S", "--out", path.string()}) == 0);
    auto j = json::parse(slurp(path));
    CHECK(j["counts"].size() == 5);
    CHECK(j["counts"][0] == "5");
    CHECK(j["entropy"]["rows"].size() == 5);
    CHECK(j["entropy"]["rows"][0].contains("upper"));
}

TEST_CASE("coding --emit writes the 7-state automaton with a manifest") {
    auto emit = scratch() / "automaton.json";
    auto summary = scratch() / "coding.json";
    REQUIRE(run({"coding", "--graph", "path2", "--emit", emit.string(), "--format", "json", "--out",
                 summary.string()}) == 0);
    auto a = json::parse(slurp(emit));
    CHECK(a["num_states"] == 7);
    CHECK(a["states"].size() == 7);
    CHECK(a["alphabet"].size() == 5);
    auto s = json::parse(slurp(summary));
    CHECK(s["states"] == 7);
    CHECK(s["primitive_power"] == 3);
    CHECK(fs::exists(emit.string() + ".manifest.json"));
    auto m = json::parse(slurp(emit.string() + ".manifest.json"));
    CHECK(m["outputs"].size() == 2);
}

TEST_CASE("topple --demo remark4 prints the odometer rows") {
    auto path = scratch() / "demo.csv";
    REQUIRE(run({"topple", "--graph", "path2", "--demo", "remark4", "--out", path.string()}) == 0);
    auto text = slurp(path);
    const std::string head = "rung,v0,v1\n1,0,0\n2,0,0\n3,1,0\n4,2,1\n5,1,1\n6,1,1\n";
    CHECK(text.rfind(head, 0) == 0);
    CHECK(text.find("16,1,1\n") != std::string::npos);
}

TEST_CASE("topple from a configuration file with schedule check") {
    auto cfg = scratch() / "cfg.json";
    std::ofstream(cfg) << R"({"first_rung": 0, "rungs": [[3,3],[3,3],[3,3]]})";
    auto path = scratch() / "topple.json";
    REQUIRE(run({"--format", "json", "topple", "--config", cfg.string(), "--add", "1,0", "--check-schedules", "--out",
                 path.string()}) == 0);
    auto j = json::parse(slurp(path));
    CHECK(j["abelian_check"] == true);
    CHECK(j["odometer"].is_object());
}

TEST_CASE("outputs are byte-identical across reruns") {
    const std::vector<std::vector<std::string>> commands{
        {"census", "--n", "6", "--variant", "REC"},
        {"spectral"},
        {"measure", "--event", "-1:3,3/*/3,2", "--side", "both"},
        {"sample", "--kind", "muL", "--width", "12", "--count", "20", "--seed", "7"},
        {"sample", "--kind", "finite", "--width", "6", "--count", "20"},
        {"sample", "--kind", "recurrent", "--width", "6", "--count", "5", "--boundary"},
        {"blast", "--K", "3,4", "--samples", "2"},
        {"mixture", "--windows", "-2:2", "--event", "0:3,3"},
        {"mixture", "--windows", "-1:3", "--event", "0:*", "--mode", "sample", "--samples", "200"},
        {"experiment", "cycle-topple", "--sizes", "3", "--K", "3", "--samples", "10"},
        {"--format", "json", "graph", "--graph", "cycle3"},
    };
    int i = 0;
    for (const auto& c : commands) {
        CAPTURE(c[0]);
        auto [a, b] = twice("det" + std::to_string(i++), c);
        CHECK(!a.empty());
        CHECK(a == b);
    }
}

TEST_CASE("the seed changes sampled output") {
    auto [a, b] = twice("s1", {"sample", "--width", "10", "--count", "10", "--seed", "1"});
    auto [c, d] = twice("s2", {"sample", "--width", "10", "--count", "10", "--seed", "2"});
    CHECK(a != c);
}

TEST_CASE("exit codes") {
    CHECK(run({"--help"}) == 0);
    CHECK(run({"census", "--help"}) == 0);
    CHECK(run({"census", "--n", "3", "--bogus"}) == 2);
    CHECK(run({}) == 2);
    CHECK(run({"census", "--n", "3", "--variant", "Q"}) == 2);
    CHECK(run({"--graph", "nosuchgraph", "graph"}) == 2);
    CHECK(run({"measure", "--event", "0:9,9", "--method", "bogus"}) == 2);
    CHECK(run({"topple", "--demo", "remark4", "--graph", "path3"}) == 2);
    CHECK(run({"mixture", "--windows", "3:1", "--event", "0:3,3"}) == 2);
    auto sink = (scratch() / "sink.txt").string();
    CHECK(run({"--out", sink, "coding", "--max-states", "3"}) == 3);
    CHECK(run({"--out", sink, "mixture", "--windows", "-6:18", "--event", "0:3,3"}) == 3);
    CHECK(run({"--out", sink, "topple", "--demo", "remark4", "--step-cap", "2"}) == 3);
    CHECK(run({"--out", sink, "census", "--n", "10", "--max-enum", "10"}) == 3);
}

TEST_CASE("measure output rows agree across methods") {
    auto path = scratch() / "measure.json";
    REQUIRE(run({"--format", "json", "measure", "--event", "0:3,3", "--out", path.string()}) == 0);
    auto rows = json::parse(slurp(path));
    REQUIRE(rows.size() == 3);
    const double target = (std::sqrt(3.0) - 1) / 2;
    for (const auto& r : rows) CHECK(r["value"].get<double>() == doctest::Approx(target).epsilon(1e-9));
}

TEST_CASE("cycle spectral output survives a failed renewal truncation") {
    auto path = scratch() / "cycle4.json";
    REQUIRE(run({"--graph", "cycle4", "--format", "json", "spectral", "--renewal-order", "64", "--out", path.string()}) == 0);
    auto j = json::parse(slurp(path));
    CHECK(j.contains("rho"));
    CHECK(j.contains("renewal_unavailable"));
}
