#include "cqed/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace cqed {

namespace {
LogLevel parse_level() {
  const char* env = std::getenv("CQED_LOG");
  if (!env) return LogLevel::warn;
  const std::string v(env);
  if (v == "error" || v == "0") return LogLevel::error;
  if (v == "warn" || v == "1") return LogLevel::warn;
  if (v == "info" || v == "2") return LogLevel::info;
  if (v == "debug" || v == "3") return LogLevel::debug;
  return LogLevel::warn;
}

const char* tag(LogLevel l) {
  switch (l) {
    case LogLevel::error: return "error";
    case LogLevel::warn: return "warn";
    case LogLevel::info: return "info";
    default: return "debug";
  }
}

std::mutex io_mutex;
}  // namespace

LogLevel log_level() {
  static const LogLevel lvl = parse_level();
  return lvl;
}

void log(LogLevel lvl, const std::string& msg) {
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  std::lock_guard<std::mutex> lock(io_mutex);
  std::cerr << "[cqedsim " << tag(lvl) << "] " << msg << "\n";
}

}  // namespace cqed
