#include "icicl/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace icicl::log {

namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

sink& current_sink() {
    static sink s;
    return s;
}

void emit(level lvl, std::string_view message) {
    std::lock_guard lock(sink_mutex());
    if (auto& s = current_sink()) {
        s(lvl, message);
        return;
    }
    std::cerr << (lvl == level::warning ? "warning: " : "") << message << '\n';
}

}  // namespace

void set_sink(sink s) {
    std::lock_guard lock(sink_mutex());
    current_sink() = std::move(s);
}

void info(std::string_view message) { emit(level::info, message); }

void warn(std::string_view message) { emit(level::warning, message); }

}  // namespace icicl::log
