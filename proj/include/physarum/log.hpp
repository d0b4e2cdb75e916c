#pragma once

#include <string>

namespace physarum::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Threshold from the PHYSARUM_LOG environment variable (default: warn).
Level threshold();

void emit(Level level, const std::string& message);

inline void error(const std::string& m) { emit(Level::error, m); }
inline void warn(const std::string& m) { emit(Level::warn, m); }
inline void info(const std::string& m) { emit(Level::info, m); }
inline void debug(const std::string& m) { emit(Level::debug, m); }

}  // namespace physarum::log
