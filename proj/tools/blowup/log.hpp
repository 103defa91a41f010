#pragma once

#include <string>

namespace cli {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Reads BLOWUP_LOG (error, warn, info, debug or 0-3); warn when unset or unrecognised.
Level log_level();

void log(Level level, const std::string& message);

inline void info(const std::string& m) { log(Level::Info, m); }
inline void debug(const std::string& m) { log(Level::Debug, m); }
inline void warn(const std::string& m) { log(Level::Warn, m); }

}  // namespace cli
