#pragma once

#include <functional>
#include <string_view>

namespace ugcl {

enum class LogLevel { kDebug, kInfo, kWarning, kError, kOff };

/// Process-wide minimum level; messages below it are dropped. Default kWarning.
void set_log_level(LogLevel level);
LogLevel log_level();

/// Replaces the stderr sink (pass nullptr to restore it).
void set_log_sink(std::function<void(LogLevel, std::string_view)> sink);

void log(LogLevel level, std::string_view message);
inline void log_info(std::string_view m) { log(LogLevel::kInfo, m); }
inline void log_warning(std::string_view m) { log(LogLevel::kWarning, m); }

}  // namespace ugcl
