#pragma once

#include <iostream>
#include <string>

namespace provgraph {

enum class LogLevel { Debug, Info, Warn, Error, Off };

inline LogLevel &log_level() {
    static LogLevel lvl = LogLevel::Warn;
    return lvl;
}

inline void log(LogLevel lvl, const std::string &msg) {
    if (lvl < log_level()) return;
    static const char *tag[] = {"debug", "info", "warn", "error"};
    std::cerr << "[" << tag[static_cast<int>(lvl)] << "] " << msg << "\n";
}

}  // namespace provgraph
