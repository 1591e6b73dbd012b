#include "nser/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace nser {

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("NSER_LOG");
    if (!env) return LogLevel::kInfo;
    if (std::strcmp(env, "error") == 0) return LogLevel::kError;
    if (std::strcmp(env, "warn") == 0) return LogLevel::kWarn;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

void log_msg(LogLevel level, const std::string& msg) {
  if (level > log_level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[nser:%s] %s\n", names[static_cast<int>(level)],
               msg.c_str());
}

}  // namespace nser
