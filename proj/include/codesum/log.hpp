#pragma once

#include <string_view>

namespace codesum::log {

enum class Level { debug, info, warning, error };

void set_level(Level level);
void write(Level level, std::string_view message);

inline void info(std::string_view message) { write(Level::info, message); }
inline void warn(std::string_view message) { write(Level::warning, message); }
inline void error(std::string_view message) { write(Level::error, message); }

}  // namespace codesum::log
