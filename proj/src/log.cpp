#include "codesum/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace codesum::log {

namespace {

std::atomic<Level> g_level{Level::info};
std::mutex g_mutex;

constexpr const char* tag(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warning: return "warning";
        case Level::error: return "error";
    }
    return "?";
}

}  // namespace

void set_level(Level level) { g_level.store(level); }

void write(Level level, std::string_view message) {
    if (level < g_level.load()) {
        return;
    }
    std::lock_guard<std::mutex> lock(g_mutex);
    std::cerr << "[codesum " << tag(level) << "] " << message << '\n';
}

}  // namespace codesum::log
