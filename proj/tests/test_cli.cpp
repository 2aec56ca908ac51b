#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "support.hpp"

namespace {

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(IMMERSE_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe)) output += buf;
    int status = pclose(pipe);
    return {WEXITSTATUS(status), output};
}

std::string scratch(const std::string& name) {
    std::filesystem::create_directories("cli_scratch");
    return "cli_scratch/" + name;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string demo(const std::string& file) { return immerse::test::data_path(file); }

}  // namespace

TEST_CASE("run replays the demo and emits the haptic protocol") {
    std::string trace = scratch("demo.trace");
    RunResult r = run_cli("run --scene " + demo("demo.scene") + " --scenario " +
                          demo("demo.scn") + " --trace " + trace);
    CHECK(r.exit_code == 0);
    // exactly one summary line on stdout
    CHECK(std::count(r.output.begin(), r.output.end(), '\n') == 1);
    CHECK(r.output.find("run complete") != std::string::npos);

    std::string contents = immerse::test::read_file(trace);
    size_t high = contents.find("kind=PinChange pin=8 level=HIGH");
    size_t low = contents.find("kind=PinChange pin=8 level=LOW");
    CHECK(high != std::string::npos);
    CHECK(low != std::string::npos);
    CHECK(high < low);
}

TEST_CASE("run rejects malformed scenes with a positioned diagnostic and exit 2") {
    std::string bad = scratch("bad.scene");
    write_file(bad, "node Spatial \"A\"\nnode Wobble \"B\"\n");
    RunResult r = run_cli("run --scene " + bad + " --scenario " + demo("demo.scn") +
                          " --trace " + scratch("bad.trace"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find(":2:6:") != std::string::npos);
    CHECK(r.output.find("Wobble") != std::string::npos);
}

TEST_CASE("run maps a diverging physics state to exit 3") {
    std::string scene = scratch("runaway.scene");
    write_file(scene,
               "node RigidBody \"Runaway\" layer=1 mask=1 pos=0,0,0 shape=sphere 0.1 "
               "vel=1e308,0,0\n");
    std::string scn = scratch("runaway.scn");
    write_file(scn, "run_until 12\n");
    RunResult r = run_cli("run --scene " + scene + " --scenario " + scn);
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("NonFiniteState") != std::string::npos);
}

TEST_CASE("the final trace record closes the run at exactly run_until") {
    std::string scn = scratch("until10.scn");
    write_file(scn, "at 0 pose Head 0 1.7 0\nrun_until 10\n");
    std::string trace = scratch("until10.trace");
    RunResult r = run_cli("run --scene " + demo("demo.scene") + " --scenario " + scn +
                          " --trace " + trace);
    REQUIRE(r.exit_code == 0);
    std::string contents = immerse::test::read_file(trace);
    size_t last_line_start = contents.rfind('\n', contents.size() - 2);
    std::string last = contents.substr(last_line_start + 1);
    CHECK(last.rfind("tick=900 t=10.000000 ", 0) == 0);
}

TEST_CASE("verify accepts the demo expectations and rejects broken ones") {
    std::string trace = scratch("verify.trace");
    RunResult run = run_cli("run --scene " + demo("demo.scene") + " --scenario " +
                            demo("demo.scn") + " --trace " + trace);
    REQUIRE(run.exit_code == 0);

    RunResult ok = run_cli("verify " + trace + " " + demo("demo.expect"));
    CHECK(ok.exit_code == 0);

    std::string failing = scratch("failing.expect");
    write_file(failing, "expect count kind=PinChange == 7\n");
    RunResult fail = run_cli("verify " + trace + " " + failing);
    CHECK(fail.exit_code == 1);
    CHECK(fail.output.find("expect count kind=PinChange == 7") != std::string::npos);
    CHECK(fail.output.find("actual 2") != std::string::npos);

    std::string missing_kind = scratch("missing.expect");
    write_file(missing_kind, "expect order Explosion[0].boom == yes\n");
    RunResult miss = run_cli("verify " + trace + " " + missing_kind);
    CHECK(miss.exit_code == 1);
    CHECK(miss.output.find("Explosion") != std::string::npos);

    std::string malformed = scratch("malformed.expect");
    write_file(malformed, "expect sideways kind=PinChange == 1\n");
    RunResult bad = run_cli("verify " + trace + " " + malformed);
    CHECK(bad.exit_code == 2);
}

TEST_CASE("replay-check distinguishes identical and divergent traces") {
    std::string a = scratch("replay_a.trace");
    std::string b = scratch("replay_b.trace");
    REQUIRE(run_cli("run --scene " + demo("demo.scene") + " --scenario " + demo("demo.scn") +
                    " --trace " + a)
                .exit_code == 0);
    REQUIRE(run_cli("run --scene " + demo("demo.scene") + " --scenario " + demo("demo.scn") +
                    " --trace " + b)
                .exit_code == 0);
    CHECK(run_cli("replay-check " + a + " " + b).exit_code == 0);

    // a different sampling stride is a different trace
    std::string c = scratch("replay_c.trace");
    REQUIRE(run_cli("run --scene " + demo("demo.scene") + " --scenario " + demo("demo.scn") +
                    " --sample-stride 45 --trace " + c)
                .exit_code == 0);
    RunResult diff = run_cli("replay-check " + a + " " + c);
    CHECK(diff.exit_code == 1);
    CHECK(diff.output.find("differ at line") != std::string::npos);

    RunResult io = run_cli("replay-check " + a + " cli_scratch/nonexistent.trace");
    CHECK(io.exit_code == 2);
}

TEST_CASE("a passthrough serial route writes raw bytes to the target path") {
    std::string sink = scratch("haptics.bin");
    std::remove(sink.c_str());
    RunResult r = run_cli("run --scene " + demo("demo.scene") + " --scenario " +
                          demo("demo.scn") + " --serial passthrough:" + sink);
    CHECK(r.exit_code == 0);
    CHECK(immerse::test::read_file(sink) == "hl");
}

TEST_CASE("unknown flags are an input error") {
    RunResult r = run_cli("run --nonsense");
    CHECK(r.exit_code == 2);
}

TEST_CASE("tick-rate override paces the whole run") {
    std::string scn = scratch("rate.scn");
    write_file(scn, "at 0 pose Head 0 1.7 0\nrun_until 2\n");
    std::string trace = scratch("rate.trace");
    RunResult r = run_cli("run --scene " + demo("demo.scene") + " --scenario " + scn +
                          " --tick-rate 60 --trace " + trace);
    REQUIRE(r.exit_code == 0);
    std::string contents = immerse::test::read_file(trace);
    size_t last_line_start = contents.rfind('\n', contents.size() - 2);
    // 2 s at 60 Hz closes on tick 120
    CHECK(contents.substr(last_line_start + 1).rfind("tick=120 t=2.000000 ", 0) == 0);
}

TEST_CASE("an absurd run_until is rejected as input error") {
    std::string scn = scratch("huge.scn");
    write_file(scn, "run_until 1e300\n");
    RunResult r = run_cli("run --scene " + demo("demo.scene") + " --scenario " + scn);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("out of range") != std::string::npos);
}

TEST_CASE("verify supports the full comparison operator set") {
    std::string trace = scratch("ops.trace");
    REQUIRE(run_cli("run --scene " + demo("demo.scene") + " --scenario " + demo("demo.scn") +
                    " --trace " + trace)
                .exit_code == 0);
    std::string ops = scratch("ops.expect");
    write_file(ops,
               "expect count kind=PinChange >= 1\n"
               "expect count kind=PinChange <= 2\n"
               "expect count kind=PinChange != 3\n"
               "expect count kind=PinChange < 3\n"
               "expect count kind=PinChange > 1\n"
               "expect count kind=AreaEnter level=NOPE == 0\n");
    CHECK(run_cli("verify " + trace + " " + ops).exit_code == 0);
}

TEST_CASE("IMMERSE_LOG=info enables diagnostics on stderr") {
    std::string trace = scratch("log.trace");
    RunResult quiet = run_cli("run --scene " + demo("demo.scene") + " --scenario " +
                              demo("demo.scn") + " --trace " + trace);
    CHECK(quiet.output.find("[immerse info]") == std::string::npos);

    std::string cmd = std::string("IMMERSE_LOG=info ") + IMMERSE_CLI_PATH + " run --scene " +
                      demo("demo.scene") + " --scenario " + demo("demo.scn") + " --trace " +
                      trace + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe)) output += buf;
    pclose(pipe);
    CHECK(output.find("[immerse info] loaded") != std::string::npos);
    CHECK(output.find("[immerse info] finished at tick 1080") != std::string::npos);
}
