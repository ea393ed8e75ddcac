#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace icicl {

/// Order-preserving JSON tree used for every OpenAPI document.
using json = nlohmann::ordered_json;

enum class document_format { json, yaml };

enum class format_hint { json, yaml, auto_detect };

/// A parsed OpenAPI (or arbitrary JSON/YAML) document.
struct api_document {
    json root;
    document_format format = document_format::json;
    /// API name used for extracted parameters; empty falls back to info.title.
    std::string name;
};

/// Parses bytes as JSON or YAML. Throws syntax_error with line/column.
api_document parse_document(std::string_view bytes, format_hint hint = format_hint::auto_detect);

/// Loads a file, using its extension as the format hint and its stem as the API name.
api_document load_document(const std::filesystem::path& path);

/// Serializes in the document's own format (2-space indent, trailing newline).
std::string serialize(const api_document& doc);

std::string to_json_text(const json& node);
std::string to_yaml_text(const json& node);

namespace pointer {

/// Escapes one reference token (`~` -> `~0`, `/` -> `~1`).
std::string escape(std::string_view token);

std::string append(std::string_view base, std::string_view token);

/// Returns nullptr when the pointer is malformed or does not resolve.
const json* resolve(const json& root, std::string_view ptr) noexcept;
json* resolve(json& root, std::string_view ptr) noexcept;

}  // namespace pointer

}  // namespace icicl
