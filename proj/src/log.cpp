#include "immerse/log.hpp"

#include <cstdlib>
#include <iostream>

namespace immerse {

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("IMMERSE_LOG");
        if (!env) return LogLevel::Error;
        std::string value(env);
        if (value == "info") return LogLevel::Info;
        if (value == "warn") return LogLevel::Warn;
        return LogLevel::Error;
    }();
    return level;
}

void log_error(const std::string& msg) { std::cerr << "[immerse error] " << msg << "\n"; }

void log_warn(const std::string& msg) {
    if (log_level() >= LogLevel::Warn) std::cerr << "[immerse warn] " << msg << "\n";
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::cerr << "[immerse info] " << msg << "\n";
}

}  // namespace immerse
