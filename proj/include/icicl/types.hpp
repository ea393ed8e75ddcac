#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icicl/document.hpp"

namespace icicl {

enum class schema_kind { string, integer, number, boolean, array, object, enumeration, datetime, unknown };

std::string_view to_string(schema_kind kind) noexcept;
std::optional<schema_kind> parse_schema_kind(std::string_view name) noexcept;

/// Declared type of a parameter. Immutable; array item types are shared.
class schema_type {
  public:
    schema_type() = default;

    /// Any kind except enumeration and array.
    static schema_type of(schema_kind kind);
    static schema_type enumeration(std::vector<std::string> values);
    static schema_type array_of(schema_type item);

    schema_kind kind() const noexcept { return kind_; }
    const std::vector<std::string>& enum_values() const noexcept { return enum_values_; }
    /// Present iff kind() == array.
    const schema_type* item() const noexcept { return item_.get(); }

    friend bool operator==(const schema_type& a, const schema_type& b);

  private:
    schema_kind kind_ = schema_kind::unknown;
    std::vector<std::string> enum_values_;
    std::shared_ptr<const schema_type> item_;
};

enum class value_kind { string, integer, number, boolean, array, object, null };

std::string_view to_string(value_kind kind) noexcept;
std::optional<value_kind> parse_value_kind(std::string_view name) noexcept;

/// JSON-literal classification of text; anything that is not a JSON literal is a string.
value_kind classify(std::string_view raw_text);

/// One example value carried by a parameter, a generation, or an output.
///
/// raw_text is the exact serialized form. A plain string is stored bare
/// (`EUR`); a string whose bare form would read as another literal is stored
/// JSON-quoted (`"42"`), so that kind() always equals classify(raw_text()).
class example_value {
  public:
    /// nullopt when raw is blank after trimming. The text is kept as given.
    static std::optional<example_value> from_text(std::string raw);
    /// Canonical value for a JSON node; nullopt for blank strings and null.
    static std::optional<example_value> from_json(const json& node);

    const std::string& raw_text() const noexcept { return raw_; }
    value_kind kind() const noexcept { return kind_; }

    /// The value as a JSON node (strings decoded).
    json to_json() const;
    /// Display text: decoded string content, or raw_text for other kinds.
    std::string text() const;
    /// Key for case-insensitive comparisons.
    std::string folded() const;

    friend bool operator==(const example_value&, const example_value&) = default;

  private:
    example_value(std::string raw, value_kind kind) : raw_(std::move(raw)), kind_(kind) {}

    std::string raw_;
    value_kind kind_ = value_kind::string;
};

enum class param_location { path, query, header, cookie, body_field };

std::string_view to_string(param_location loc) noexcept;
std::optional<param_location> parse_param_location(std::string_view name) noexcept;

struct api_parameter {
    std::string api_name;
    std::string operation_id;
    std::string param_name;
    std::string description;
    param_location location = param_location::query;
    bool required = false;
    schema_type declared_type;
    std::vector<example_value> existing_examples;
    /// JSON pointer into the source document.
    std::string source_pointer;

    friend bool operator==(const api_parameter&, const api_parameter&) = default;
};

/// (api_name, source_pointer): identity used for self-exclusion and labels.
bool same_site(const api_parameter& a, const api_parameter& b) noexcept;

json to_json(const schema_type& t);
json to_json(const example_value& v);
json to_json(const api_parameter& p);

/// Strict decoders; throw icicl::error naming the offending field.
schema_type schema_type_from_json(const json& j);
example_value example_value_from_json(const json& j);
api_parameter api_parameter_from_json(const json& j);

}  // namespace icicl
