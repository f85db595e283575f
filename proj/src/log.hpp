#pragma once

#include <string>

namespace rbai {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

void set_log_level(LogLevel level);
LogLevel log_level();
LogLevel log_level_from_name(const std::string& name);  // throws InvalidArgument

void log_message(LogLevel level, const std::string& message);

inline void log_info(const std::string& message) { log_message(LogLevel::Info, message); }
inline void log_debug(const std::string& message) { log_message(LogLevel::Debug, message); }

}  // namespace rbai
