#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "jmgt/checkpoint.hpp"
#include "jmgt/experiments.hpp"
#include "jmgt/output.hpp"

using namespace jmgt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path d = fs::path(JMGT_TEST_SCRATCH) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void put(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(JMGT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

const char* small_sim = R"([physics]
tau = 0.5
c = 1
delta = 0.1
m = 0.1
tau_k = 0.5
k = 1

[grid]
dim = 2
points = 16
box_length = 8

[time]
dt = 0.01
t_end = 0.5

[experiment]
profile = random
amplitude = 0.01
seed = 7

[output]
stride = 5
formats = csv,checkpoint
)";

}  // namespace

TEST_CASE("config text round trips through dump") {
    RunSpec a = parse_config(small_sim);
    CHECK(a.physics.k == 1.0);
    CHECK(a.grid.points == 16);
    CHECK(a.experiment.profile == "random");
    CHECK(a.explicit_keys.count("physics.k") == 1);
    RunSpec b = parse_config(dump_config(a));
    CHECK(dump_config(b) == dump_config(a));
    CHECK(b.time.dt == a.time.dt);
    // defaults fill the rest
    RunSpec d = parse_config("[grid]\npoints = 8\n");
    CHECK(d.physics.tau == 0.5);
    CHECK(d.output.stride == 1);
}

TEST_CASE("config rejects unknown and invalid entries") {
    CHECK_THROWS_AS(parse_config("[physics]\ntua = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[fizzics]\ntau = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[physics]\ntau = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[physics]\ndelta = -0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[grid]\npoints = 15\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[physics]\nk = 1\nb_over_a = 5\n"), ConfigError);
    RunSpec s = parse_config("");
    s.time.dt = -1.0;
    CHECK_THROWS_AS(validate(s), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("checkpoint round trip is bit exact") {
    fs::path dir = scratch("ckpt");
    RunSpec spec = parse_config(small_sim);
    PhysicalParams p = spec.params();
    for (const char* mode : {"closed", "ring"}) {
        spec.history.mode = mode;
        StateVector s = initial_state_for(spec, p);
        s = solve(s, p, spec.solver()).final_state;
        auto bytes = encode_checkpoint(s, p);
        write_checkpoint((dir / "a.jmgt1").string(), s, p);
        Checkpoint c = read_checkpoint((dir / "a.jmgt1").string());
        CHECK(encode_checkpoint(c.state, c.params) == bytes);
        CHECK(c.state.psi.coeffs == s.psi.coeffs);
        CHECK(c.state.t == s.t);
        CHECK(c.state.step_count == s.step_count);

        auto bad = bytes;
        bad[0] = 'X';
        CHECK_THROWS_AS(decode_checkpoint(bad), CheckpointError);
        auto cut = bytes;
        cut.resize(cut.size() - 3);
        CHECK_THROWS_AS(decode_checkpoint(cut), CheckpointError);
        auto extra = bytes;
        extra.push_back(0);
        CHECK_THROWS_AS(decode_checkpoint(extra), CheckpointError);
    }
}

TEST_CASE("resuming from a checkpoint reproduces the uninterrupted run") {
    fs::path dir = scratch("resume");
    for (const char* mode : {"closed", "ring"}) {
        RunSpec spec = parse_config(small_sim);
        spec.history.mode = mode;
        PhysicalParams p = spec.params();
        StateVector s0 = initial_state_for(spec, p);
        SolverConfig full = spec.solver();
        StateVector straight = solve(s0, p, full).final_state;

        SolverConfig half = full;
        half.t_end = 0.25;
        StateVector mid = solve(s0, p, half).final_state;
        write_checkpoint((dir / "mid.jmgt1").string(), mid, p);
        spec.time.resume_from = (dir / "mid.jmgt1").string();
        StateVector resumed = solve(initial_state_for(spec, p), p, full).final_state;
        CHECK(encode_checkpoint(resumed, p) == encode_checkpoint(straight, p));

        spec.physics.m = 0.2;
        CHECK_THROWS_AS(initial_state_for(spec, spec.params()), ConfigError);
    }
}

TEST_CASE("csv output is formatted with 17 significant digits") {
    CHECK(format_f64(0.1) == "0.10000000000000001");
    CHECK(format_f64(1.0) == "1");
    CHECK(format_f64(std::nan("")) == "nan");
    fs::path dir = scratch("csv");
    {
        CsvWriter w((dir / "x.csv").string(), {"a", "b"});
        w.row({1.0 / 3.0, -2.5});
    }
    CHECK(slurp(dir / "x.csv") == "a,b\n0.33333333333333331,-2.5\n");
}

TEST_CASE("cli simulate is deterministic and writes a manifest") {
    fs::path dir = scratch("cli_sim");
    put(dir / "run.ini", small_sim);
    const std::string cfg = "--config " + (dir / "run.ini").string();
    REQUIRE(run_cli("simulate " + cfg + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run_cli("simulate " + cfg + " --out " + (dir / "b").string()) == 0);
    CHECK(slurp(dir / "a" / "timeseries.csv") == slurp(dir / "b" / "timeseries.csv"));
    CHECK(slurp(dir / "a" / "final.jmgt1") == slurp(dir / "b" / "final.jmgt1"));
    CHECK(fs::exists(dir / "a" / "manifest.json"));
    CHECK(slurp(dir / "a" / "manifest.json").find("\"command\"") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "a" / "energies.svg"));  // svg not requested

    // a different seed gives different data
    REQUIRE(run_cli("simulate " + cfg + " --seed 8 --out " + (dir / "c").string()) == 0);
    CHECK(slurp(dir / "a" / "timeseries.csv") != slurp(dir / "c" / "timeseries.csv"));

    // stride 5 over 50 steps: initial row + 10
    std::istringstream ts(slurp(dir / "a" / "timeseries.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(ts, line)) ++rows;
    CHECK(rows == 12);
}

TEST_CASE("cli exit codes") {
    fs::path dir = scratch("cli_codes");
    put(dir / "bad.ini", "[physics]\ndelta = -0.1\n");
    CHECK(run_cli("simulate --config " + (dir / "bad.ini").string() + " --out " + (dir / "o1").string()) == 3);
    put(dir / "typo.ini", "[physics]\ndleta = 0.1\n");
    CHECK(run_cli("simulate --config " + (dir / "typo.ini").string()) == 3);
    CHECK(run_cli("simulate") == 3);
    CHECK(run_cli("bogus --config " + (dir / "bad.ini").string()) == 3);

    std::string blow = small_sim;
    blow.replace(blow.find("amplitude = 0.01"), 16, "amplitude = 40.0");
    blow.replace(blow.find("t_end = 0.5"), 11, "t_end = 5.0");
    put(dir / "blow.ini", blow);
    CHECK(run_cli("simulate --config " + (dir / "blow.ini").string() + " --out " + (dir / "o2").string()) == 2);
    CHECK(fs::exists(dir / "o2" / "manifest.json"));
}

TEST_CASE("zero amplitude gives an all-zero energy record") {
    fs::path dir = scratch("zero");
    std::string z = small_sim;
    z.replace(z.find("amplitude = 0.01"), 16, "amplitude = 0");
    put(dir / "z.ini", z);
    REQUIRE(run_cli("simulate --config " + (dir / "z.ini").string() + " --out " + (dir / "o").string()) == 0);
    std::istringstream ts(slurp(dir / "o" / "timeseries.csv"));
    std::string line;
    std::getline(ts, line);
    int rows = 0;
    while (std::getline(ts, line)) {
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');  // t
        while (std::getline(cells, cell, ',')) CHECK(std::stod(cell) == 0.0);
        ++rows;
    }
    CHECK(rows == 11);
}

TEST_CASE("verify-energy passes and detects corrupted dissipation") {
    fs::path dir = scratch("verify");
    const char* base = R"([physics]
k = 0
[grid]
dim = 2
points = 16
box_length = 10
[time]
dt = 0.002
t_end = 0.2
[verify]
samples = 20
)";
    put(dir / "ok.ini", base);
    CHECK(run_cli("verify-energy --config " + (dir / "ok.ini").string() + " --out " + (dir / "ok").string()) == 0);
    CHECK(fs::exists(dir / "ok" / "verify.csv"));
    put(dir / "bad.ini", std::string(base) + "corrupt_dissipation = true\n");
    CHECK(run_cli("verify-energy --config " + (dir / "bad.ini").string() + " --out " + (dir / "bad").string()) ==
          4);
}

TEST_CASE("scan with a zero amplitude range is bounded") {
    RunSpec spec = parse_config(R"([grid]
dim = 1
points = 16
box_length = 10
[physics]
k = 1
[time]
dt = 0.01
t_end = 1
[scan]
amp_min = 0
amp_max = 0
)");
    spec.output.directory = scratch("scan0").string();
    ScanResult r = run_scan(spec);
    REQUIRE_FALSE(r.runs.empty());
    for (const auto& run : r.runs) {
        CHECK(run.verdict == "bounded");
        CHECK(run.sup_norm == 0.0);
    }
}

TEST_CASE("convergence study in time reports fourth order") {
    RunSpec spec = parse_config(R"([grid]
dim = 1
points = 16
box_length = 8
[physics]
k = 0.5
[time]
dt = 0.04
t_end = 0.8
[experiment]
amplitude = 0.1
[convergence]
levels = 4
kind = time
)");
    auto rows = run_convergence(spec);
    REQUIRE(rows.size() >= 3);
    CHECK(rows[rows.size() - 2].order == doctest::Approx(4.0).epsilon(0.05));
}
