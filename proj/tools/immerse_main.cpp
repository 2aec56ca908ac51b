#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "immerse/sim.hpp"
#include "immerse/verify.hpp"

namespace {

// --serial virtual | passthrough:<path>
bool parse_serial_flag(const std::string& value, immerse::RunConfig& config) {
    if (value == "virtual") {
        config.serial = immerse::SerialMode::Virtual;
        return true;
    }
    const std::string prefix = "passthrough:";
    if (value.rfind(prefix, 0) == 0 && value.size() > prefix.size()) {
        config.serial = immerse::SerialMode::Passthrough;
        config.serial_path = value.substr(prefix.size());
        return true;
    }
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"immerse - headless VR experience simulator"};
    app.require_subcommand(1);

    immerse::RunConfig config;
    std::string serial_flag = "virtual";
    auto* run = app.add_subcommand("run", "replay a scenario against a scene and emit a trace");
    run->add_option("--scene", config.scene_path, "scene file (.scene)")->required();
    run->add_option("--scenario", config.scenario_path, "scenario file (.scn)")->required();
    run->add_option("--trace", config.trace_path, "trace output file (.trace)");
    run->add_option("--serial", serial_flag, "virtual (default) or passthrough:<path>");
    run->add_option("--sample-stride", config.sample_stride,
                    "ticks between TransformSample batches (default 90)");
    run->add_option("--tick-rate", config.tick_rate, "physics rate, default 90");

    std::string verify_trace_path, verify_assert_path;
    auto* verify = app.add_subcommand("verify", "check a trace against an assertions file");
    verify->add_option("trace", verify_trace_path, "trace file")->required();
    verify->add_option("assertions", verify_assert_path, "assertions file")->required();

    std::string replay_a, replay_b;
    auto* replay = app.add_subcommand("replay-check", "compare two traces byte for byte");
    replay->add_option("a", replay_a, "first trace")->required();
    replay->add_option("b", replay_b, "second trace")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            return app.exit(e);
        }
        std::cerr << e.what() << "\n";
        return 2;
    }

    if (run->parsed()) {
        if (!parse_serial_flag(serial_flag, config)) {
            std::cerr << "error: --serial must be 'virtual' or 'passthrough:<path>'\n";
            return 2;
        }
        if (config.sample_stride < 1) {
            std::cerr << "error: --sample-stride must be >= 1\n";
            return 2;
        }
        if (!(config.tick_rate > 0)) {
            std::cerr << "error: --tick-rate must be positive\n";
            return 2;
        }
        return immerse::run_simulation(config, std::cout, std::cerr);
    }
    if (verify->parsed()) {
        return immerse::verify_trace(verify_trace_path, verify_assert_path, std::cout);
    }
    return immerse::replay_check(replay_a, replay_b, std::cout);
}
