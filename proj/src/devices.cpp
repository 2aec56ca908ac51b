#include "immerse/devices.hpp"

#include <algorithm>
#include <cmath>

#include <fcntl.h>
#include <unistd.h>

#include "immerse/log.hpp"

namespace immerse {

namespace {
constexpr int kStandardBauds[] = {300, 1200, 2400, 4800, 9600, 19200, 38400, 57600, 115200};
constexpr double kBitsPerByte = 10.0;  // start + 8 data + stop
}  // namespace

SerialHub::Port::~Port() {
    if (fd >= 0) ::close(fd);
}

SerialHub::SerialHub(TraceWriter* trace, double tick_rate) : trace_(trace), rate_(tick_rate) {
    dt_ = 1.0 / rate_;
    auto virt = std::make_unique<Port>();
    virt->name = "virt0";
    virt->is_virtual = true;
    ports_.push_back(std::move(virt));
}

std::vector<std::string> SerialHub::list_ports() const {
    std::vector<std::string> names;
    names.reserve(ports_.size());
    for (const auto& p : ports_) names.push_back(p->name);
    return names;
}

void SerialHub::register_passthrough(const std::string& name, const std::string& path) {
    auto port = std::make_unique<Port>();
    port->name = name;
    port->passthrough_path = path;
    ports_.push_back(std::move(port));
}

void SerialHub::route_virtual_to(const std::string& path) {
    ports_[0]->is_virtual = false;
    ports_[0]->passthrough_path = path;
}

SerialHub::Port& SerialHub::checked(PortHandle h, bool must_be_open) {
    if (h.index < 0 || h.index >= static_cast<int>(ports_.size())) {
        throw EngineError(Err::PortNotFound, "invalid handle");
    }
    Port& p = *ports_[h.index];
    if (must_be_open && !p.open) {
        throw EngineError(Err::PortClosed, p.name);
    }
    return p;
}

const SerialHub::Port& SerialHub::checked(PortHandle h, bool must_be_open) const {
    return const_cast<SerialHub*>(this)->checked(h, must_be_open);
}

PortHandle SerialHub::open(const std::string& name, int baud, int buffer_capacity) {
    int index = -1;
    for (int i = 0; i < static_cast<int>(ports_.size()); ++i) {
        if (ports_[i]->name == name) {
            index = i;
            break;
        }
    }
    if (index < 0) throw EngineError(Err::PortNotFound, name);
    Port& p = *ports_[index];
    if (p.open) throw EngineError(Err::AlreadyOpen, name);
    if (baud == 0) baud = 9600;
    if (std::find(std::begin(kStandardBauds), std::end(kStandardBauds), baud) ==
        std::end(kStandardBauds)) {
        throw EngineError(Err::BadBaud, std::to_string(baud));
    }
    p.open = true;
    p.baud = baud;
    p.capacity = buffer_capacity > 0 ? static_cast<std::size_t>(buffer_capacity) : 1;
    p.tx.clear();
    p.rx.clear();
    p.wire_free_s = static_cast<double>(now_tick_) * dt_;
    p.written_log.clear();
    if (p.is_virtual) {
        arduino_.reset();  // board waits on open, pin 8 starts LOW
    } else if (!p.passthrough_path.empty()) {
        p.fd = ::open(p.passthrough_path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_NONBLOCK, 0644);
        if (p.fd < 0) throw EngineError(Err::IoError, p.passthrough_path);
    }
    return {index};
}

void SerialHub::deliver(Port& p, unsigned char byte) {
    if (p.is_virtual) {
        if (auto level = arduino_.handle_byte(byte)) {
            if (trace_) trace_->pin_change(8, *level);
        }
    } else if (p.fd >= 0) {
        [[maybe_unused]] ssize_t n = ::write(p.fd, &byte, 1);
    }
}

void SerialHub::write(PortHandle port, std::string_view data) {
    Port& p = checked(port);
    double now_s = static_cast<double>(now_tick_) * dt_;
    for (unsigned char b : data) {
        double start = std::max(now_s, p.wire_free_s);
        p.wire_free_s = start + kBitsPerByte / p.baud;
        auto due = static_cast<std::int64_t>(std::ceil(p.wire_free_s / dt_ - 1e-12));
        p.tx.push_back({b, due});
        p.written_log.push_back(static_cast<char>(b));
        if (trace_) trace_->serial_tx(p.name, b);
    }
}

int SerialHub::get_available(PortHandle port) const {
    return static_cast<int>(checked(port).rx.size());
}

void SerialHub::flush(PortHandle port) {
    Port& p = checked(port);
    while (!p.tx.empty()) {
        deliver(p, p.tx.front().byte);
        p.tx.pop_front();
    }
    p.wire_free_s = static_cast<double>(now_tick_) * dt_;
}

void SerialHub::pump(std::int64_t tick) {
    now_tick_ = tick;
    for (auto& port : ports_) {
        if (!port->open) continue;
        while (!port->tx.empty() && port->tx.front().due_tick <= tick) {
            deliver(*port, port->tx.front().byte);
            port->tx.pop_front();
        }
        if (!port->is_virtual && port->fd >= 0) {
            unsigned char buf[256];
            ssize_t n;
            while ((n = ::read(port->fd, buf, sizeof(buf))) > 0) {
                device_write(port->name, {reinterpret_cast<char*>(buf), static_cast<size_t>(n)});
            }
        }
    }
}

void SerialHub::device_write(const std::string& name, std::string_view data) {
    for (auto& port : ports_) {
        if (port->name != name) continue;
        for (unsigned char b : data) {
            if (port->rx.size() >= port->capacity) {
                port->rx.pop_front();
                if (trace_) trace_->warning("serial rx overflow on " + name + ", oldest byte dropped");
                log_warn("serial rx overflow on " + name);
            }
            port->rx.push_back(b);
        }
        return;
    }
    throw EngineError(Err::PortNotFound, name);
}

const std::string& SerialHub::bytes_written(PortHandle port) const {
    return checked(port, false).written_log;
}

// -- tracked devices -----------------------------------------------------

void DeviceTracks::build(const ScenarioDoc& scenario) {
    for (auto& t : tracks_) t.clear();
    for (const auto& cmd : scenario.commands) {
        if (cmd.type != ScenarioCmd::Type::Pose) continue;
        Quat rot;
        if (cmd.rot) {
            rot = Quat::from_axis_angle({(*cmd.rot)[0], (*cmd.rot)[1], (*cmd.rot)[2]},
                                        (*cmd.rot)[3]);
        }
        tracks_[static_cast<int>(cmd.role)].push_back({cmd.t, cmd.pos, rot});
    }
}

bool DeviceTracks::has_keys(DeviceRole role) const {
    return !tracks_[static_cast<int>(role)].empty();
}

Transform DeviceTracks::sample(DeviceRole role, double t) const {
    const auto& keys = tracks_[static_cast<int>(role)];
    if (keys.empty()) return {};
    if (t <= keys.front().t) return {keys.front().pos, keys.front().rot};
    if (t >= keys.back().t) return {keys.back().pos, keys.back().rot};
    for (size_t i = 1; i < keys.size(); ++i) {
        if (t > keys[i].t) continue;
        const PoseKey& a = keys[i - 1];
        const PoseKey& b = keys[i];
        double span = b.t - a.t;
        if (span <= 0.0) return {b.pos, b.rot};
        double u = (t - a.t) / span;
        return {lerp(a.pos, b.pos, u), slerp(a.rot, b.rot, u)};
    }
    return {keys.back().pos, keys.back().rot};
}

void sample_devices(const DeviceTracks& tracks, const std::vector<RoleBinding>& bindings,
                    double t) {
    for (const auto& binding : bindings) {
        if (!tracks.has_keys(binding.role)) continue;
        Transform pose = tracks.sample(binding.role, t);
        binding.node->set_local(pose);
    }
}

}  // namespace immerse
