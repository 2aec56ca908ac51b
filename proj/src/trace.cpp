#include "immerse/trace.hpp"

#include <charconv>
#include <cstdio>

namespace immerse {

std::string format_fixed6(double v) {
    if (v == 0.0) v = 0.0;  // canonicalize -0
    char buf[352];          // %.6f of the largest double is ~316 chars
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string format_vec6(const Vec3& v) {
    return format_fixed6(v.x) + "," + format_fixed6(v.y) + "," + format_fixed6(v.z);
}

void TraceWriter::line(std::string_view kind, const std::string& payload) {
    if (!out_) return;
    double t = static_cast<double>(tick_) / rate_;
    *out_ << "tick=" << tick_ << " t=" << format_fixed6(t) << " kind=" << kind;
    if (!payload.empty()) *out_ << ' ' << payload;
    *out_ << '\n';
}

void TraceWriter::area_enter(const std::string& area, const std::string& other) {
    line("AreaEnter", "area=" + area + " other=" + other);
}

void TraceWriter::area_exit(const std::string& area, const std::string& other) {
    line("AreaExit", "area=" + area + " other=" + other);
}

void TraceWriter::serial_tx(const std::string& port, unsigned char byte) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "0x%02x", byte);
    line("SerialTx", "port=" + port + " byte=" + buf);
}

void TraceWriter::pin_change(int pin, bool high) {
    line("PinChange", "pin=" + std::to_string(pin) + " level=" + (high ? "HIGH" : "LOW"));
}

void TraceWriter::platform_state(const std::string& node, std::string_view state, double y) {
    line("PlatformState",
         "node=" + node + " state=" + std::string(state) + " y=" + format_fixed6(y));
}

void TraceWriter::impulse(const std::string& board, const Vec3& torque) {
    line("Impulse", "board=" + board + " torque=" + format_vec6(torque));
}

void TraceWriter::teleport(const std::string& origin, const Vec3& to) {
    line("Teleport", "origin=" + origin + " to=" + format_vec6(to));
}

void TraceWriter::transform_sample(const std::string& node, const Vec3& pos) {
    line("TransformSample", "node=" + node + " pos=" + format_vec6(pos));
}

void TraceWriter::warning(const std::string& msg) { line("Warning", "msg=" + msg); }

const std::string* TraceLine::field(std::string_view key) const {
    for (const auto& [k, v] : fields) {
        if (k == key) return &v;
    }
    return nullptr;
}

bool parse_trace_line(std::string_view text, TraceLine& out, std::string& error) {
    out = TraceLine{};
    size_t pos = 0;
    int index = 0;
    while (pos < text.size()) {
        while (pos < text.size() && text[pos] == ' ') ++pos;
        if (pos >= text.size()) break;
        size_t eq = text.find('=', pos);
        if (eq == std::string_view::npos) {
            error = "token without '='";
            return false;
        }
        std::string key(text.substr(pos, eq - pos));
        std::string value;
        if (key == "msg") {
            value = std::string(text.substr(eq + 1));  // free text to end of line
            pos = text.size();
        } else {
            size_t end = text.find(' ', eq + 1);
            if (end == std::string_view::npos) end = text.size();
            value = std::string(text.substr(eq + 1, end - eq - 1));
            pos = end;
        }
        if (index == 0) {
            if (key != "tick") {
                error = "expected tick=";
                return false;
            }
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out.tick);
            if (ec != std::errc{} || p != value.data() + value.size()) {
                error = "bad tick value";
                return false;
            }
        } else if (index == 1) {
            if (key != "t") {
                error = "expected t=";
                return false;
            }
            try {
                out.t = std::stod(value);
            } catch (...) {
                error = "bad t value";
                return false;
            }
        } else if (index == 2) {
            if (key != "kind") {
                error = "expected kind=";
                return false;
            }
            out.kind = value;
        } else {
            out.fields.emplace_back(key, value);
        }
        ++index;
    }
    if (index < 3) {
        error = "truncated record";
        return false;
    }
    return true;
}

}  // namespace immerse
