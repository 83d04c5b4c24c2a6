#include "seedling/log.hpp"

#include <iostream>

namespace seedling::log {

namespace {
Level g_level = Level::warn;
}

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void warn(std::string_view msg) {
  if (g_level >= Level::warn) std::cerr << "warning: " << msg << '\n';
}

void info(std::string_view msg) {
  if (g_level >= Level::info) std::cerr << msg << '\n';
}

}  // namespace seedling::log
