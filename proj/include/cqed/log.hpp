#pragma once

#include <string>

namespace cqed {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Level comes from the CQED_LOG environment variable (error|warn|info|debug
// or 0..3); default warn. Messages go to stderr.
LogLevel log_level();
void log(LogLevel lvl, const std::string& msg);

inline void log_error(const std::string& m) { log(LogLevel::error, m); }
inline void log_warn(const std::string& m) { log(LogLevel::warn, m); }
inline void log_info(const std::string& m) { log(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log(LogLevel::debug, m); }

}  // namespace cqed
