#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace icicl::text {

std::string_view trim(std::string_view s) noexcept;

/// Lowercases ASCII letters only; other bytes pass through.
std::string ascii_lower(std::string_view s);

/// First `count` Unicode scalar values of a UTF-8 string. Invalid bytes count as one scalar each.
std::string_view utf8_prefix(std::string_view s, std::size_t count) noexcept;

std::size_t utf8_length(std::string_view s) noexcept;

std::string sha256_hex(std::string_view bytes);

}  // namespace icicl::text
