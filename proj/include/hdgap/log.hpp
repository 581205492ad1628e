#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace hdgap::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3 };

using Sink = std::function<void(Level, std::string_view)>;

// Replaces the process-wide sink. The default writes "warn" and above to stderr.
void set_sink(Sink sink);
void set_level(Level level);
Level level();

void write(Level level, std::string_view message);

inline void debug(std::string_view m) { write(Level::debug, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }

}  // namespace hdgap::log
