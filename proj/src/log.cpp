#include "physarum/log.hpp"

#include <cstdlib>
#include <iostream>

namespace physarum::log {

Level threshold() {
  static Level level = [] {
    const char* env = std::getenv("PHYSARUM_LOG");
    if (!env) return Level::warn;
    std::string v(env);
    if (v == "error") return Level::error;
    if (v == "warn") return Level::warn;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
  }();
  return level;
}

void emit(Level level, const std::string& message) {
  if (level > threshold()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[physarum] " << names[static_cast<int>(level)] << ": " << message << "\n";
}

}  // namespace physarum::log
