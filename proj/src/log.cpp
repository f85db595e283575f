#include "log.hpp"

#include <atomic>
#include <cstdio>

#include "errors.hpp"

namespace rbai {

namespace {
std::atomic<LogLevel> g_level{LogLevel::Warn};

const char* level_tag(LogLevel level) {
    switch (level) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
    }
    return "?";
}
}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }

LogLevel log_level() { return g_level.load(); }

LogLevel log_level_from_name(const std::string& name) {
    if (name == "error") return LogLevel::Error;
    if (name == "warn") return LogLevel::Warn;
    if (name == "info") return LogLevel::Info;
    if (name == "debug") return LogLevel::Debug;
    raise(ErrorCode::InvalidArgument, "unknown log level '" + name + "'");
}

void log_message(LogLevel level, const std::string& message) {
    if (level > g_level.load()) return;
    std::fprintf(stderr, "[rbai:%s] %s\n", level_tag(level), message.c_str());
}

}  // namespace rbai
