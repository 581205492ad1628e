#include "hdgap/log.hpp"

#include <iostream>
#include <mutex>

namespace hdgap::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

const char* tag(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "?";
}

Sink& current_sink() {
  static Sink sink = [](Level l, std::string_view m) {
    std::cerr << "[" << tag(l) << "] " << m << '\n';
  };
  return sink;
}

Level& current_level() {
  static Level lvl = Level::warn;
  return lvl;
}

}  // namespace

void set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  current_sink() = std::move(sink);
}

void set_level(Level l) {
  std::lock_guard lock(sink_mutex());
  current_level() = l;
}

Level level() {
  std::lock_guard lock(sink_mutex());
  return current_level();
}

void write(Level l, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (static_cast<int>(l) < static_cast<int>(current_level())) return;
  if (current_sink()) current_sink()(l, message);
}

}  // namespace hdgap::log
