#include "log.hpp"

#include <cstdio>
#include <cstdlib>
#include <string_view>

namespace cli {

Level log_level() {
    static const Level level = [] {
        const char* env = std::getenv("BLOWUP_LOG");
        if (!env) return Level::Warn;
        const std::string_view v(env);
        if (v == "error" || v == "0") return Level::Error;
        if (v == "info" || v == "2") return Level::Info;
        if (v == "debug" || v == "3") return Level::Debug;
        return Level::Warn;
    }();
    return level;
}

void log(Level level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[blowup %s] %s\n", names[static_cast<int>(level)], message.c_str());
}

}  // namespace cli
