#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "immerse/sceneio.hpp"
#include "immerse/trace.hpp"

namespace immerse {

// Firmware model of the haptics board: pin 8 is a pure function of the last
// 'h'/'l' byte received, LOW initially; every other byte is ignored. The
// board never transmits.
class VirtualArduino {
public:
    bool pin8_high() const { return pin8_high_; }
    void reset() { pin8_high_ = false; }

    // Returns the new level when the byte causes a transition.
    std::optional<bool> handle_byte(unsigned char b) {
        bool level = pin8_high_;
        if (b == 'h') level = true;
        else if (b == 'l') level = false;
        if (level == pin8_high_) return std::nullopt;
        pin8_high_ = level;
        return level;
    }

private:
    bool pin8_high_ = false;
};

struct PortHandle {
    int index = -1;
    bool valid() const { return index >= 0; }
};

// Serial channel registry. Port "virt0" carries the embedded haptics board;
// additional ports may pass bytes through to a filesystem path. Bytes travel
// 10 bits each (8N1) at the configured baud, quantized to simulation ticks.
class SerialHub {
public:
    explicit SerialHub(TraceWriter* trace = nullptr, double tick_rate = 90.0);

    // Deterministic ordering; "virt0" always present and first.
    std::vector<std::string> list_ports() const;

    void register_passthrough(const std::string& name, const std::string& path);

    // Swaps the embedded board out of "virt0" for a raw byte sink at path;
    // same five-call API, no pin emulation. Call before open().
    void route_virtual_to(const std::string& path);

    PortHandle open(const std::string& name, int baud, int buffer_capacity);
    void write(PortHandle port, std::string_view data);
    int get_available(PortHandle port) const;
    void flush(PortHandle port);

    // Delivers every byte whose scheduled tick has arrived. Call once at each
    // tick boundary before anything else runs.
    void pump(std::int64_t tick);

    // Device-side write into the host rx queue (drop-oldest on overflow).
    void device_write(const std::string& name, std::string_view data);

    bool virtual_pin8_high() const { return arduino_.pin8_high(); }
    const std::string& bytes_written(PortHandle port) const;

    void set_clock(std::int64_t tick, double dt) {
        now_tick_ = tick;
        dt_ = dt;
    }

private:
    struct ScheduledByte {
        unsigned char byte;
        std::int64_t due_tick;
    };
    struct Port {
        ~Port();
        std::string name;
        bool is_virtual = false;
        std::string passthrough_path;
        int fd = -1;
        bool open = false;
        int baud = 9600;
        std::size_t capacity = 0;
        std::deque<ScheduledByte> tx;
        std::deque<unsigned char> rx;
        double wire_free_s = 0.0;  // when the wire finishes the last queued byte
        std::string written_log;   // every byte accepted by write(), in order
    };

    Port& checked(PortHandle h, bool must_be_open = true);
    const Port& checked(PortHandle h, bool must_be_open = true) const;
    void deliver(Port& p, unsigned char byte);

    std::vector<std::unique_ptr<Port>> ports_;
    VirtualArduino arduino_;
    TraceWriter* trace_ = nullptr;
    double rate_ = 90.0;
    double dt_ = 1.0 / 90.0;
    std::int64_t now_tick_ = 0;
};

// Scenario-driven tracked devices: piecewise-linear position, slerped
// orientation, pose held flat outside the keyframe range.
struct PoseKey {
    double t;
    Vec3 pos;
    Quat rot;
};

class DeviceTracks {
public:
    void build(const ScenarioDoc& scenario);
    Transform sample(DeviceRole role, double t) const;
    bool has_keys(DeviceRole role) const;

private:
    std::vector<PoseKey> tracks_[5];
};

struct RoleBinding {
    DeviceRole role;
    Node* node;
};

// Writes each bound device node's local transform from the track at time t.
// Touches nothing but the device nodes' transforms.
void sample_devices(const DeviceTracks& tracks, const std::vector<RoleBinding>& bindings,
                    double t);

}  // namespace immerse
