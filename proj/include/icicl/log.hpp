#pragma once

#include <functional>
#include <string_view>

namespace icicl::log {

enum class level { info, warning };

using sink = std::function<void(level, std::string_view)>;

/// Replaces the process-wide sink. Passing an empty function restores stderr.
void set_sink(sink s);

void info(std::string_view message);
void warn(std::string_view message);

}  // namespace icicl::log
