#pragma once

#include <string>
#include <string_view>

#include "icicl/context.hpp"

namespace icicl::prompt {

inline constexpr std::string_view kHeader =
    "# Given an OpenAPI parameter, generate a unique example of the parameter.";

/// Few-shot completion prompt: one input/example block per shot, then the
/// target's input block and a dangling `example_n = `.
std::string render(const context::prompt_context& ctx);

}  // namespace icicl::prompt
