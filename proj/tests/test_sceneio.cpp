#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "immerse/sceneio.hpp"
#include "immerse/sim.hpp"
#include "immerse/trace.hpp"
#include "support.hpp"

using namespace immerse;
using immerse::test::data_path;
using immerse::test::read_file;

TEST_CASE("parses a static floor declaration") {
    auto result = parse_scene(
        "node StaticBody \"BottomFloor\" layer=1 mask=2 pos=0,0,0 shape=box 5,0.1,5\n");
    REQUIRE(result.ok());
    REQUIRE(result.doc->nodes.size() == 1);
    const NodeDecl& n = result.doc->nodes[0];
    CHECK(n.name == "BottomFloor");
    CHECK(n.node_kind == NodeKind::PhysicsBody);
    CHECK(n.body_kind == BodyKind::Static);
    CHECK(n.layer == filter_bits({1}));
    CHECK(n.mask == filter_bits({2}));
    REQUIRE(n.shape.has_value());
    CHECK(n.shape->kind == Shape::Kind::Box);
    CHECK(n.shape->half == Vec3{5, 0.1, 5});
}

TEST_CASE("empty input is a valid empty scene") {
    auto result = parse_scene("");
    REQUIRE(result.ok());
    CHECK(result.doc->nodes.empty());

    auto with_comments = parse_scene("# nothing here\n\n   # still nothing\n");
    REQUIRE(with_comments.ok());
    CHECK(with_comments.doc->nodes.empty());
}

TEST_CASE("parses a bridge board under a nested parent") {
    auto result = parse_scene(
        "node Spatial \"Bridge\"\n"
        "node Spatial \"Boards\" under Bridge\n"
        "node RigidBody \"Board1\" under Bridge/Boards layer=3 mask=2 pos=7,3.3,0.8 "
        "shape=box 0.22,0.03,0.5 mass=1 inertia=0.01,0.01,0.01\n");
    REQUIRE(result.ok());
    REQUIRE(result.doc->nodes.size() == 3);
    const NodeDecl& board = result.doc->nodes[2];
    CHECK(board.parent == "Bridge/Boards");
    CHECK(board.layer == filter_bits({3}));
    CHECK(board.mask == filter_bits({2}));
    CHECK(param_str(board.params, "inertia", "") == "0.01,0.01,0.01");
}

TEST_CASE("scene diagnostics carry 1-based line and column") {
    SUBCASE("unknown kind") {
        auto r = parse_scene("node Blob \"X\"\n");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error.line == 1);
        CHECK(r.error.col == 6);
        CHECK(r.error.message.find("Blob") != std::string::npos);
    }
    SUBCASE("forward parent reference") {
        auto r = parse_scene("node Spatial \"A\" under NotYet\nnode Spatial \"NotYet\"\n");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error.line == 1);
        CHECK(r.error.message.find("NotYet") != std::string::npos);
    }
    SUBCASE("duplicate node") {
        auto r = parse_scene("node Spatial \"A\"\nnode Spatial \"A\"\n");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error.line == 2);
    }
    SUBCASE("bad vector") {
        auto r = parse_scene("node Spatial \"A\" pos=1,2\n");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error.line == 1);
        CHECK(r.error.col == 18);
    }
    SUBCASE("unquoted name") {
        auto r = parse_scene("node Spatial Unquoted\n");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error.col == 14);
    }
    SUBCASE("bad version") {
        auto r = parse_scene("version 2\n");
        REQUIRE_FALSE(r.ok());
        CHECK(r.error.line == 1);
    }
}

TEST_CASE("parses scenario press commands") {
    auto r = parse_scenario("at 2.0 press Environment/Button\nrun_until 3\n");
    REQUIRE(r.ok());
    REQUIRE(r.doc->commands.size() == 1);
    CHECK(r.doc->commands[0].type == ScenarioCmd::Type::Press);
    CHECK(r.doc->commands[0].t == 2.0);
    CHECK(r.doc->commands[0].path == "Environment/Button");
    CHECK(r.doc->run_until == 3.0);
}

TEST_CASE("scenario rejects non-monotonic timestamps") {
    auto r = parse_scenario(
        "at 1.0 pose LeftFoot 0.5 0 0.5\n"
        "at 0.5 pose Head 0 1.7 0\n"
        "run_until 2\n");
    REQUIRE_FALSE(r.ok());
    CHECK(r.error.line == 2);
    CHECK(r.error.message.find("non-decreasing") != std::string::npos);
}

TEST_CASE("scenario requires run_until last") {
    CHECK_FALSE(parse_scenario("at 1 press A\n").ok());
    CHECK_FALSE(parse_scenario("run_until 5\nat 1 press A\n").ok());
    CHECK_FALSE(parse_scenario("").ok());
}

TEST_CASE("the bundled demo fixture parses and replays cleanly") {
    auto scene = parse_scene(read_file(data_path("demo.scene")));
    REQUIRE(scene.ok());
    CHECK(scene.doc->nodes.size() >= 15);

    auto scenario = parse_scenario(read_file(data_path("demo.scn")));
    REQUIRE(scenario.ok());
    CHECK(scenario.doc->commands.size() >= 20);

    auto sim = load_world(*scene.doc, *scenario.doc);
    CHECK_NOTHROW(sim->run());
    CHECK(sim->tick() == 1080);
}

TEST_CASE("trace records format byte-deterministically") {
    std::ostringstream out;
    TraceWriter trace(&out);
    trace.set_tick(181);
    trace.pin_change(8, true);
    CHECK(out.str() == "tick=181 t=2.011111 kind=PinChange pin=8 level=HIGH\n");

    std::ostringstream again;
    TraceWriter trace2(&again);
    trace2.set_tick(181);
    trace2.pin_change(8, true);
    CHECK(again.str() == out.str());

    std::ostringstream tx;
    TraceWriter trace3(&tx);
    trace3.set_tick(180);
    trace3.serial_tx("virt0", 'h');
    CHECK(tx.str() == "tick=180 t=2.000000 kind=SerialTx port=virt0 byte=0x68\n");
}

TEST_CASE("trace lines parse back into records") {
    TraceLine rec;
    std::string err;
    REQUIRE(parse_trace_line("tick=181 t=2.011111 kind=PinChange pin=8 level=HIGH", rec, err));
    CHECK(rec.tick == 181);
    CHECK(rec.kind == "PinChange");
    REQUIRE(rec.field("level") != nullptr);
    CHECK(*rec.field("level") == "HIGH");

    REQUIRE(parse_trace_line("tick=1 t=0.011111 kind=Warning msg=has spaces in it", rec, err));
    CHECK(*rec.field("msg") == "has spaces in it");

    CHECK_FALSE(parse_trace_line("not a record", rec, err));
    CHECK_FALSE(parse_trace_line("tick=x t=0 kind=K", rec, err));
}

TEST_CASE("load_world builds the demo world with the collision matrix") {
    auto scene = parse_scene(read_file(data_path("demo.scene")));
    REQUIRE(scene.ok());
    auto sim = load_world(*scene.doc);
    PhysicsWorld& world = sim->world();
    CHECK(world.body_count() >= 10);

    int floor = world.body_of(sim->find("/Environment/BottomFloor"));
    int player = world.body_of(sim->find("/Player"));
    int board = world.body_of(sim->find("/Bridge/Board1"));
    REQUIRE(floor >= 0);
    REQUIRE(player >= 0);
    REQUIRE(board >= 0);
    CHECK(world.interacts(floor, player));
    CHECK(world.interacts(player, board));
    CHECK_FALSE(world.interacts(floor, board));

    // candidate pairs respect the matrix: floors never pair with bridge parts
    int floor2 = world.body_of(sim->find("/Environment/UpperFloor1"));
    for (auto [i, j] : world.broadphase_pairs()) {
        bool has_floor = i == floor || j == floor || i == floor2 || j == floor2;
        bool has_board = sim->tree().path_of(world.body(i).node).find("/Bridge/") == 0 ||
                         sim->tree().path_of(world.body(j).node).find("/Bridge/") == 0;
        bool floor_board_pair = has_floor && has_board;
        CHECK_FALSE(floor_board_pair);
    }
}

TEST_CASE("load_world rejects unknown behaviors and malformed bodies") {
    auto bad_behavior = parse_scene("node Spatial \"X\" behavior=warp\n");
    REQUIRE(bad_behavior.ok());
    CHECK_THROWS_AS((void)load_world(*bad_behavior.doc), EngineError);

    auto no_shape = parse_scene("node StaticBody \"X\" layer=1\n");
    REQUIRE(no_shape.ok());
    CHECK_THROWS_AS((void)load_world(*no_shape.doc), EngineError);

    auto no_layer = parse_scene("node StaticBody \"X\" mask=1 shape=box 1,1,1\n");
    REQUIRE(no_layer.ok());
    CHECK_THROWS_AS((void)load_world(*no_layer.doc), EngineError);

    auto stray_shape = parse_scene("node Spatial \"X\" shape=box 1,1,1\n");
    REQUIRE(stray_shape.ok());
    CHECK_THROWS_AS((void)load_world(*stray_shape.doc), EngineError);
}

TEST_CASE("loading the same scene twice yields equal state hashes") {
    auto scene = parse_scene(read_file(data_path("demo.scene")));
    REQUIRE(scene.ok());
    auto a = load_world(*scene.doc);
    auto b = load_world(*scene.doc);
    CHECK(a->world().state_hash() == b->world().state_hash());
}

TEST_CASE("pretty-printed scenes reparse to the same document") {
    auto original = parse_scene(read_file(data_path("demo.scene")));
    REQUIRE(original.ok());
    auto round = parse_scene(pretty_print(*original.doc));
    REQUIRE(round.ok());
    CHECK(*round.doc == *original.doc);
}

TEST_CASE("pretty-printed scenarios reparse to the same document") {
    auto original = parse_scenario(read_file(data_path("demo.scn")));
    REQUIRE(original.ok());
    auto round = parse_scenario(pretty_print(*original.doc));
    REQUIRE(round.ok());
    CHECK(*round.doc == *original.doc);
}

namespace {

std::string random_garbage(std::mt19937& rng, bool structured) {
    std::uniform_int_distribution<int> len(0, 200);
    std::uniform_int_distribution<int> byte(1, 255);
    std::string s;
    int n = len(rng);
    if (structured) {
        const char* seeds[] = {"node ",    "StaticBody", "\"Name\"", "under ", "layer=",
                               "pos=",     "shape=box ", "1,2,3",    "at ",    "pose ",
                               "run_until", "press ",    "trigger ", "#",      "\n"};
        for (int i = 0; i < n / 8; ++i) s += seeds[rng() % (sizeof(seeds) / sizeof(seeds[0]))];
    }
    for (int i = 0; i < n; ++i) {
        char c = static_cast<char>(byte(rng));
        s += c;
        if (rng() % 17 == 0) s += '\n';
    }
    return s;
}

}  // namespace

TEST_CASE("parsers survive fuzzed inputs with positioned diagnostics") {
    std::mt19937 rng(20240601);
    for (int i = 0; i < 2000; ++i) {
        std::string input = random_garbage(rng, i % 2 == 0);
        auto scene = parse_scene(input);
        if (!scene.ok()) {
            CHECK(scene.error.line >= 1);
            CHECK(scene.error.col >= 1);
            CHECK_FALSE(scene.error.message.empty());
        }
        auto scenario = parse_scenario(input);
        if (!scenario.ok()) {
            CHECK(scenario.error.line >= 1);
            CHECK(scenario.error.col >= 1);
            CHECK_FALSE(scenario.error.message.empty());
        }
    }
}
