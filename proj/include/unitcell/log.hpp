#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace unitcell::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

inline Level& threshold() {
    static Level lvl = [] {
        const char* env = std::getenv("UNITCELL_DG_LOG");
        if (!env) return Level::warn;
        if (std::strcmp(env, "error") == 0) return Level::error;
        if (std::strcmp(env, "info") == 0) return Level::info;
        if (std::strcmp(env, "debug") == 0) return Level::debug;
        return Level::warn;
    }();
    return lvl;
}

template <typename... Args>
void emit(Level lvl, const char* fmt, Args... args) {
    if (lvl > threshold()) return;
    const char* tag[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] ", tag[static_cast<int>(lvl)]);
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

template <typename... Args>
void error(const char* fmt, Args... args) { emit(Level::error, fmt, args...); }
template <typename... Args>
void warn(const char* fmt, Args... args) { emit(Level::warn, fmt, args...); }
template <typename... Args>
void info(const char* fmt, Args... args) { emit(Level::info, fmt, args...); }
template <typename... Args>
void debug(const char* fmt, Args... args) { emit(Level::debug, fmt, args...); }

} // namespace unitcell::log
