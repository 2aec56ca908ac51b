#pragma once

#include <string>

namespace immerse {

// Diagnostics on stderr, gated by the IMMERSE_LOG environment variable
// (error, warn, info). Unset means error only.
enum class LogLevel { Error = 0, Warn = 1, Info = 2 };

LogLevel log_level();
void log_error(const std::string& msg);
void log_warn(const std::string& msg);
void log_info(const std::string& msg);

}  // namespace immerse
