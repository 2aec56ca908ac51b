#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "immerse/math.hpp"

namespace immerse {

// One line per record: `tick=<n> t=<s.6f> kind=<K> <k=v ...>`, keys in fixed
// order, LF terminated, locale-independent formatting. Two identical records
// serialize to byte-identical lines.
class TraceWriter {
public:
    TraceWriter() = default;
    explicit TraceWriter(std::ostream* out, double tick_rate = 90.0)
        : out_(out), rate_(tick_rate) {}

    void set_sink(std::ostream* out) { out_ = out; }
    void set_tick(std::int64_t tick) { tick_ = tick; }
    std::int64_t tick() const { return tick_; }

    void area_enter(const std::string& area, const std::string& other);
    void area_exit(const std::string& area, const std::string& other);
    void serial_tx(const std::string& port, unsigned char byte);
    void pin_change(int pin, bool high);
    void platform_state(const std::string& node, std::string_view state, double y);
    void impulse(const std::string& board, const Vec3& torque);
    void teleport(const std::string& origin, const Vec3& to);
    void transform_sample(const std::string& node, const Vec3& pos);
    void warning(const std::string& msg);

private:
    void line(std::string_view kind, const std::string& payload);

    std::ostream* out_ = nullptr;
    double rate_ = 90.0;
    std::int64_t tick_ = 0;
};

std::string format_fixed6(double v);
std::string format_vec6(const Vec3& v);

// Parsed form of one trace line, for the verification tooling.
struct TraceLine {
    std::int64_t tick = 0;
    double t = 0.0;
    std::string kind;
    std::vector<std::pair<std::string, std::string>> fields;

    const std::string* field(std::string_view key) const;
};

// Returns false (with a message) on malformed lines.
bool parse_trace_line(std::string_view line, TraceLine& out, std::string& error);

}  // namespace immerse
