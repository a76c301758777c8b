#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "asis/graph.hpp"
#include "asis/homo_design.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_root() {
    static fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "asis_cli_scratch";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = scratch_root() / name;
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
    fs::path out_file = dir / "stdout.txt", err_file = dir / "stderr.txt";
    std::string cmd = std::string("\"") + ASIS_CLI_PATH + "\" " + args + " > \"" +
                      out_file.string() + "\" 2> \"" + err_file.string() + "\"";
    int status = std::system(cmd.c_str());
    RunResult r;
    REQUIRE(status != -1);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text(out_file);
    r.err = read_text(err_file);
    return r;
}

const char* kCycle4 = "0 1\n1 2\n2 3\n3 0\n";

} // namespace

TEST_CASE("validate-config accepts a full experiment") {
    auto dir = fresh_dir("validate_ok");
    write_text(dir / "g.edges", kCycle4);
    write_text(dir / "cfg.json", R"({
  "graph": {"path": ")" + (dir / "g.edges").string() + R"("},
  "params": {"beta": 0.4, "delta": 0.6, "phi": 0.2, "psi": 0.3},
  "simulation": {"horizon": 2.0, "runs": 10, "grid": [0.5, 1.0, 2.0]}
})");
    auto r = run_cli("validate-config -c \"" + (dir / "cfg.json").string() + "\"", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("ok") != std::string::npos);
    CHECK(r.out.find("n=4 m=4") != std::string::npos);
}

TEST_CASE("missing config file") {
    auto dir = fresh_dir("missing_cfg");
    auto r = run_cli("validate-config -c \"" + (dir / "nope.json").string() + "\"", dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("cannot open") != std::string::npos);
}

TEST_CASE("malformed json points at the offending line") {
    auto dir = fresh_dir("bad_json");
    write_text(dir / "cfg.json", "{\n\"graph\": {\"path\": \"g.edges\"},\n\"params\": oops\n}\n");
    auto r = run_cli("validate-config -c \"" + (dir / "cfg.json").string() + "\"", dir);
    CHECK(r.code == 2);
    CHECK(r.err.find(":3:") != std::string::npos);
}

TEST_CASE("unknown keys and zero runs are rejected") {
    auto dir = fresh_dir("bad_fields");
    write_text(dir / "g.edges", kCycle4);
    std::string gpath = (dir / "g.edges").string();
    write_text(dir / "unknown.json", R"({
  "graph": {"path": ")" + gpath + R"("},
  "paramz": {"beta": 0.4}
})");
    auto r1 = run_cli("validate-config -c \"" + (dir / "unknown.json").string() + "\"", dir);
    CHECK(r1.code == 2);
    CHECK(r1.err.find("unknown key") != std::string::npos);

    write_text(dir / "zero_runs.json", R"({
  "graph": {"path": ")" + gpath + R"("},
  "simulation": {"horizon": 1.0, "runs": 0}
})");
    auto r2 = run_cli("validate-config -c \"" + (dir / "zero_runs.json").string() + "\"", dir);
    CHECK(r2.code == 2);
    CHECK(r2.err.find("runs") != std::string::npos);
}

TEST_CASE("simulate is deterministic in the seed") {
    auto dir = fresh_dir("sim_det");
    write_text(dir / "g.edges", kCycle4);
    write_text(dir / "cfg.json", R"({
  "graph": {"path": ")" + (dir / "g.edges").string() + R"("},
  "params": {"beta": 0.8, "delta": 0.5, "phi": 0.3, "psi": 0.4},
  "simulation": {"horizon": 2.0, "runs": 400, "seed": 99,
                 "grid": {"points": 8, "end": 2.0, "start": 0.25}, "with_q": true}
})");
    std::string cfg = (dir / "cfg.json").string();
    auto r1 = run_cli("simulate -c \"" + cfg + "\" -o \"" + (dir / "a").string() + "\"", dir);
    auto r2 = run_cli("simulate -c \"" + cfg + "\" -o \"" + (dir / "b").string() + "\"", dir);
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(read_text(dir / "a" / "ensemble.csv") == read_text(dir / "b" / "ensemble.csv"));
    CHECK(read_text(dir / "a" / "trajectory.csv") == read_text(dir / "b" / "trajectory.csv"));
    CHECK(read_text(dir / "a" / "ensemble.csv").rfind("t,", 0) == 0);
}

TEST_CASE("analyze rejects a disconnected graph") {
    auto dir = fresh_dir("disconnected");
    write_text(dir / "g.edges", "0 1\n2 3\n");
    write_text(dir / "cfg.json", R"({
  "graph": {"path": ")" + (dir / "g.edges").string() + R"("},
  "params": {"beta": 0.4, "delta": 0.6}
})");
    auto r = run_cli("analyze -c \"" + (dir / "cfg.json").string() + "\"", dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("connected") != std::string::npos);
}

TEST_CASE("analyze writes a certificate that matches the closed form") {
    auto dir = fresh_dir("analyze_cert");
    write_text(dir / "g.edges", kCycle4);
    write_text(dir / "cfg.json", R"({
  "graph": {"path": ")" + (dir / "g.edges").string() + R"("},
  "params": {"beta": 0.3, "delta": 0.9, "phi": 0.1, "psi": 0.2},
  "output_dir": ")" + (dir / "out").string() + R"("
})");
    auto r = run_cli("analyze -c \"" + (dir / "cfg.json").string() + "\"", dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("homogeneous: rho=") != std::string::npos);
    auto cert = json::parse(read_text(dir / "out" / "certificate.json"));
    double want = asis::lambda_plus({0.3, 0.9, 0.1, 0.2, 2.0});  // cycle rho = 2
    CHECK(std::abs(cert["eta"].get<double>() - want) <= 1e-8);
    CHECK(cert["stable"].get<bool>() == (want < 0.0));
}

TEST_CASE("design-homo solves the cycle instance") {
    auto dir = fresh_dir("homo_design");
    write_text(dir / "g.edges", kCycle4);
    write_text(dir / "cfg.json", R"({
  "graph": {"path": ")" + (dir / "g.edges").string() + R"("},
  "params": {"beta": 0.4, "delta": 0.5},
  "bounds": {"phi_lo": 0.0, "phi_hi": 2.0, "psi_lo": 0.1, "psi_hi": 0.5},
  "design": {"alpha": 0.05, "cost": "normalized"},
  "output_dir": ")" + (dir / "out").string() + R"("
})");
    auto r = run_cli("design-homo -c \"" + (dir / "cfg.json").string() + "\"", dir);
    REQUIRE(r.code == 0);
    auto dj = json::parse(read_text(dir / "out" / "design.json"));
    REQUIRE(dj["feasible"].get<bool>());
    double phi = dj["phi"].get<double>(), psi = dj["psi"].get<double>();
    CHECK(phi >= 0.0);
    CHECK(phi <= 2.0);
    CHECK(psi >= 0.1);
    CHECK(psi <= 0.5);
    double lp = asis::lambda_plus({0.4, 0.5, phi, psi, 2.0});
    CHECK(lp <= -0.05 + 1e-9);
    CHECK(std::abs(dj["lambda_plus"].get<double>() - lp) <= 1e-12);
}

TEST_CASE("design-hetero reports infeasibility with exit code 3") {
    auto dir = fresh_dir("hetero_infeasible");
    write_text(dir / "g.edges", kCycle4);
    write_text(dir / "cfg.json", R"({
  "graph": {"path": ")" + (dir / "g.edges").string() + R"("},
  "params": {"beta": 0.4, "delta": 0.5, "psi": 0.2},
  "bounds": {"phi_lo": 0.0, "phi_hi": 1.0},
  "design": {"alpha": 50.0, "cost": "normalized"},
  "output_dir": ")" + (dir / "out").string() + R"("
})");
    auto r = run_cli("design-hetero -c \"" + (dir / "cfg.json").string() + "\"", dir);
    CHECK(r.code == 3);
    CHECK(r.out.find("infeasible") != std::string::npos);
    auto dj = json::parse(read_text(dir / "out" / "design.json"));
    CHECK_FALSE(dj["feasible"].get<bool>());
}

TEST_CASE("design-hetero solves the cycle instance") {
    auto dir = fresh_dir("hetero_ok");
    write_text(dir / "g.edges", kCycle4);
    write_text(dir / "cfg.json", R"({
  "graph": {"path": ")" + (dir / "g.edges").string() + R"("},
  "params": {"beta": 0.45, "delta": 0.5, "psi": 0.2},
  "bounds": {"phi_lo": 0.0, "phi_hi": 1.5},
  "design": {"alpha": 0.05, "cost": "normalized"},
  "output_dir": ")" + (dir / "out").string() + R"("
})");
    auto r = run_cli("design-hetero -c \"" + (dir / "cfg.json").string() + "\"", dir);
    REQUIRE(r.code == 0);
    auto dj = json::parse(read_text(dir / "out" / "design.json"));
    REQUIRE(dj["feasible"].get<bool>());
    CHECK(dj["eta"].get<double>() <= -0.05 + 1e-6);
    auto csv = read_text(dir / "out" / "phi.csv");
    CHECK(csv.rfind("node,degree,phi\n", 0) == 0);
}

TEST_CASE("gen-graph") {
    auto dir = fresh_dir("gen");
    SUBCASE("preferential attachment") {
        auto out = (dir / "ba.edges").string();
        auto r = run_cli("gen-graph --type ba --n 30 --attach 2 --seed 7 --out \"" + out + "\"",
                         dir);
        REQUIRE(r.code == 0);
        CHECK(r.out.find("n=30") != std::string::npos);
        auto text = read_text(out);
        CHECK(text.rfind("# generated graph: type=ba", 0) == 0);
        CHECK(text.find("seed=7") != std::string::npos);
        auto g = asis::Graph::load_edge_list(out);
        CHECK(g.node_count() == 30);
        CHECK(g.connected());
    }
    SUBCASE("unknown type") {
        auto r = run_cli("gen-graph --type star --n 5 --out \"" + (dir / "x.edges").string() +
                             "\"",
                         dir);
        CHECK(r.code == 2);
        CHECK(r.err.find("unknown graph type") != std::string::npos);
    }
}
