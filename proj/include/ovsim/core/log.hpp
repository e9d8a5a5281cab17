#pragma once

#include <cstdio>

namespace ovsim {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Current level, initialized once from the OVERLAPSIM_LOG environment
/// variable (error|warn|info|debug). Default: warn.
LogLevel log_level();

void log_message(LogLevel level, const char* fmt, ...)
    __attribute__((format(printf, 2, 3)));

#define OVSIM_LOG(level, ...)                        \
  do {                                               \
    if (static_cast<int>(level) <=                   \
        static_cast<int>(::ovsim::log_level()))      \
      ::ovsim::log_message(level, __VA_ARGS__);      \
  } while (0)

#define OVSIM_WARN(...) OVSIM_LOG(::ovsim::LogLevel::Warn, __VA_ARGS__)
#define OVSIM_INFO(...) OVSIM_LOG(::ovsim::LogLevel::Info, __VA_ARGS__)
#define OVSIM_DEBUG(...) OVSIM_LOG(::ovsim::LogLevel::Debug, __VA_ARGS__)
#define OVSIM_ERROR(...) OVSIM_LOG(::ovsim::LogLevel::Error, __VA_ARGS__)

}  // namespace ovsim
