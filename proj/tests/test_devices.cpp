#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>
#include <sstream>

#include "immerse/devices.hpp"
#include "support.hpp"

using namespace immerse;

namespace {

constexpr double kDt = 1.0 / 90.0;

struct HubFixture {
    std::ostringstream trace_out;
    TraceWriter trace{&trace_out};
    SerialHub hub{&trace};

    int pin_changes(const std::string& level) const {
        std::istringstream in(trace_out.str());
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
            if (line.find("kind=PinChange") != std::string::npos &&
                line.find("level=" + level) != std::string::npos) {
                ++n;
            }
        }
        return n;
    }
};

}  // namespace

TEST_CASE("list_ports always leads with the virtual device") {
    SerialHub hub;
    CHECK(hub.list_ports() == std::vector<std::string>{"virt0"});

    hub.register_passthrough("ext0", "/tmp/immerse-ext0");
    CHECK(hub.list_ports() == std::vector<std::string>{"virt0", "ext0"});
}

TEST_CASE("open validates name, baud and single ownership") {
    SerialHub hub;
    try {
        hub.open("nope", 9600, 1000);
        FAIL("expected PortNotFound");
    } catch (const EngineError& e) {
        CHECK(e.code() == Err::PortNotFound);
    }

    try {
        hub.open("virt0", 12345, 1000);
        FAIL("expected BadBaud");
    } catch (const EngineError& e) {
        CHECK(e.code() == Err::BadBaud);
    }

    PortHandle port = hub.open("virt0", 9600, 1000);
    CHECK(port.valid());
    CHECK_FALSE(hub.virtual_pin8_high());  // board resets to LOW on open
    CHECK(hub.get_available(port) == 0);

    try {
        hub.open("virt0", 9600, 1000);
        FAIL("expected AlreadyOpen");
    } catch (const EngineError& e) {
        CHECK(e.code() == Err::AlreadyOpen);
    }

    // baud 0 selects the 9600 default
    SerialHub defaults;
    CHECK(defaults.open("virt0", 0, 1000).valid());
}

TEST_CASE("writes reach the device on the next tick at 9600 baud") {
    HubFixture f;
    f.hub.set_clock(100, kDt);
    PortHandle port = f.hub.open("virt0", 9600, 1000);

    f.hub.write(port, "h");
    CHECK_FALSE(f.hub.virtual_pin8_high());  // still on the wire
    f.hub.pump(100);
    CHECK_FALSE(f.hub.virtual_pin8_high());  // 10 bits at 9600 bps exceed this tick
    f.hub.pump(101);
    CHECK(f.hub.virtual_pin8_high());
    CHECK(f.pin_changes("HIGH") == 1);
}

TEST_CASE("flush delivers pending bytes the same tick") {
    HubFixture f;
    f.hub.set_clock(50, kDt);
    PortHandle port = f.hub.open("virt0", 9600, 1000);

    f.hub.flush(port);  // empty flush is a no-op
    CHECK_FALSE(f.hub.virtual_pin8_high());

    f.hub.write(port, "h");
    f.hub.flush(port);
    CHECK(f.hub.virtual_pin8_high());

    f.hub.write(port, "l");
    f.hub.write(port, "h");
    f.hub.flush(port);
    CHECK(f.hub.virtual_pin8_high());  // FIFO: 'l' then 'h'
    CHECK(f.pin_changes("HIGH") == 2);
    CHECK(f.pin_changes("LOW") == 1);
    CHECK(f.hub.bytes_written(port) == "hlh");
}

TEST_CASE("empty writes and closed ports") {
    SerialHub hub;
    PortHandle port = hub.open("virt0", 9600, 1000);
    hub.write(port, "");
    hub.pump(5);
    CHECK(hub.get_available(port) == 0);

    SerialHub closed_hub;
    try {
        closed_hub.write({0}, "h");
        FAIL("expected PortClosed");
    } catch (const EngineError& e) {
        CHECK(e.code() == Err::PortClosed);
    }
    try {
        closed_hub.get_available({0});
        FAIL("expected PortClosed");
    } catch (const EngineError& e) {
        CHECK(e.code() == Err::PortClosed);
    }
}

TEST_CASE("the embedded board never transmits") {
    HubFixture f;
    PortHandle port = f.hub.open("virt0", 9600, 1000);
    f.hub.write(port, "hlhlhl");
    for (int t = 0; t < 20; ++t) f.hub.pump(t);
    CHECK(f.hub.get_available(port) == 0);
}

TEST_CASE("device-side writes queue into rx and overflow drops the oldest") {
    HubFixture f;
    PortHandle port = f.hub.open("virt0", 9600, 4);
    f.hub.device_write("virt0", "abc");
    CHECK(f.hub.get_available(port) == 3);
    f.hub.device_write("virt0", "def");
    CHECK(f.hub.get_available(port) == 4);  // capped; 'a' and 'b' dropped
    CHECK(f.trace_out.str().find("kind=Warning") != std::string::npos);
    CHECK(f.trace_out.str().find("overflow") != std::string::npos);
}

TEST_CASE("pin 8 follows the byte protocol") {
    VirtualArduino dev;
    CHECK_FALSE(dev.pin8_high());
    CHECK(dev.handle_byte('h') == std::optional<bool>{true});
    CHECK(dev.handle_byte('x') == std::nullopt);
    CHECK(dev.pin8_high());
    CHECK(dev.handle_byte('l') == std::optional<bool>{false});
    CHECK(dev.handle_byte('l') == std::nullopt);

    SUBCASE("replay of hlhhl transitions LOW-HIGH-LOW-HIGH-LOW") {
        VirtualArduino board;
        std::vector<bool> transitions;
        for (unsigned char b : std::string("hlhhl")) {
            if (auto level = board.handle_byte(b)) transitions.push_back(*level);
        }
        CHECK(transitions == std::vector<bool>{true, false, true, false});
    }
}

TEST_CASE("pin state equals the fold oracle over random byte strings") {
    std::mt19937 rng(2024);
    const char alphabet[] = {'h', 'l', 'x', 'H', 0, '\n', 'q'};
    for (int trial = 0; trial < 500; ++trial) {
        VirtualArduino dev;
        bool oracle = false;
        int len = static_cast<int>(rng() % 24);
        for (int i = 0; i < len; ++i) {
            unsigned char b = static_cast<unsigned char>(alphabet[rng() % sizeof(alphabet)]);
            dev.handle_byte(b);
            if (b == 'h') oracle = true;
            if (b == 'l') oracle = false;
        }
        CHECK(dev.pin8_high() == oracle);
    }
}

TEST_CASE("passthrough transport lands bytes in the target file in order") {
    std::string path = "./serial_passthrough_test.bin";
    std::remove(path.c_str());
    {
        SerialHub hub;
        hub.route_virtual_to(path);
        hub.set_clock(0, kDt);
        PortHandle port = hub.open("virt0", 300, 64);  // 3 ticks per byte at 300 baud

        hub.write(port, "hello");
        std::vector<size_t> sizes;
        for (int t = 0; t <= 20; ++t) {
            hub.pump(t);
            sizes.push_back(immerse::test::read_file(path).size());
        }
        // monotone delivery, all five bytes by the end
        for (size_t i = 1; i < sizes.size(); ++i) CHECK(sizes[i] >= sizes[i - 1]);
        CHECK(sizes.front() == 0);
        CHECK(sizes.back() == 5);
        CHECK(immerse::test::read_file(path) == "hello");
    }
    std::remove(path.c_str());
}

TEST_CASE("wire latency grows with queue position") {
    std::string path = "./serial_latency_test.bin";
    std::remove(path.c_str());
    SerialHub hub;
    hub.route_virtual_to(path);
    hub.set_clock(0, kDt);
    PortHandle port = hub.open("virt0", 1200, 64);  // 10/1200 s per byte < dt

    hub.write(port, "abcd");
    std::vector<int> arrival_tick;
    size_t last = 0;
    for (int t = 0; t <= 10; ++t) {
        hub.pump(t);
        size_t sz = immerse::test::read_file(path).size();
        for (size_t i = last; i < sz; ++i) arrival_tick.push_back(t);
        last = sz;
    }
    REQUIRE(arrival_tick.size() == 4);
    for (size_t i = 1; i < arrival_tick.size(); ++i) {
        CHECK(arrival_tick[i] >= arrival_tick[i - 1]);
    }
    CHECK(arrival_tick[0] == 1);  // first byte finishes inside the first tick
    std::remove(path.c_str());
}

TEST_CASE("device sampling interpolates piecewise-linearly at tick boundaries") {
    ScenarioDoc doc;
    ScenarioCmd a;
    a.type = ScenarioCmd::Type::Pose;
    a.role = DeviceRole::Head;
    a.t = 0.0;
    a.pos = {0, 1.7, 0};
    ScenarioCmd b = a;
    b.t = 1.0;
    b.pos = {1, 1.7, 0};
    doc.commands = {a, b};

    DeviceTracks tracks;
    tracks.build(doc);
    CHECK(tracks.sample(DeviceRole::Head, 0.5).pos == Vec3{0.5, 1.7, 0});
    CHECK(tracks.sample(DeviceRole::Head, -1.0).pos == Vec3{0, 1.7, 0});
    CHECK(tracks.sample(DeviceRole::Head, 9.0).pos == Vec3{1, 1.7, 0});

    SUBCASE("single keyframe holds for all time") {
        ScenarioDoc single;
        single.commands = {a};
        DeviceTracks tr;
        tr.build(single);
        CHECK(tr.sample(DeviceRole::Head, 0.0).pos == Vec3{0, 1.7, 0});
        CHECK(tr.sample(DeviceRole::Head, 123.0).pos == Vec3{0, 1.7, 0});
    }
}

TEST_CASE("sampling touches only the bound device nodes") {
    SceneTree tree;
    Node* origin = tree.add_child(tree.root(), "PlayerOrigin", NodeKind::Origin);
    Node* camera = tree.add_child(origin, "Camera", NodeKind::Camera);
    Node* bystander = tree.add_child(tree.root(), "Bystander", NodeKind::Spatial);
    bystander->set_local({{4, 5, 6}, {}});
    origin->set_local({{1, 0, 0}, {}});

    ScenarioDoc doc;
    ScenarioCmd pose;
    pose.type = ScenarioCmd::Type::Pose;
    pose.role = DeviceRole::Head;
    pose.t = 0.0;
    pose.pos = {0, 1.7, 0};
    doc.commands = {pose};
    DeviceTracks tracks;
    tracks.build(doc);

    sample_devices(tracks, {{DeviceRole::Head, camera}}, 0.0);
    CHECK(camera->local().pos == Vec3{0, 1.7, 0});
    CHECK(bystander->local().pos == Vec3{4, 5, 6});
    CHECK(origin->local().pos == Vec3{1, 0, 0});

    // unbound roles and roles without keyframes leave nodes alone
    sample_devices(tracks, {{DeviceRole::LeftFoot, bystander}}, 0.5);
    CHECK(bystander->local().pos == Vec3{4, 5, 6});
}
