#include "ovsim/core/log.hpp"

#include <cstdarg>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace ovsim {

namespace {

LogLevel parse_level() {
  const char* env = std::getenv("OVERLAPSIM_LOG");
  if (!env) return LogLevel::Warn;
  if (std::strcmp(env, "error") == 0) return LogLevel::Error;
  if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
  if (std::strcmp(env, "info") == 0) return LogLevel::Info;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  return LogLevel::Warn;
}

const char* level_name(LogLevel l) {
  switch (l) {
    case LogLevel::Error: return "ERROR";
    case LogLevel::Warn: return "WARN";
    case LogLevel::Info: return "INFO";
    case LogLevel::Debug: return "DEBUG";
  }
  return "?";
}

std::mutex g_log_mutex;

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

void log_message(LogLevel level, const char* fmt, ...) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::fprintf(stderr, "[ovsim %s] ", level_name(level));
  std::va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fputc('\n', stderr);
}

}  // namespace ovsim
