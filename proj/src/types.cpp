#include "icicl/types.hpp"

#include <array>
#include <utility>

#include "icicl/error.hpp"
#include "icicl/text.hpp"

namespace icicl {

namespace {

constexpr std::array<std::pair<schema_kind, std::string_view>, 9> kSchemaKinds{{
    {schema_kind::string, "string"},
    {schema_kind::integer, "integer"},
    {schema_kind::number, "number"},
    {schema_kind::boolean, "boolean"},
    {schema_kind::array, "array"},
    {schema_kind::object, "object"},
    {schema_kind::enumeration, "enum"},
    {schema_kind::datetime, "datetime"},
    {schema_kind::unknown, "unknown"},
}};

constexpr std::array<std::pair<value_kind, std::string_view>, 7> kValueKinds{{
    {value_kind::string, "string"},
    {value_kind::integer, "integer"},
    {value_kind::number, "number"},
    {value_kind::boolean, "boolean"},
    {value_kind::array, "array"},
    {value_kind::object, "object"},
    {value_kind::null, "null"},
}};

constexpr std::array<std::pair<param_location, std::string_view>, 5> kLocations{{
    {param_location::path, "path"},
    {param_location::query, "query"},
    {param_location::header, "header"},
    {param_location::cookie, "cookie"},
    {param_location::body_field, "body-field"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) noexcept {
    for (const auto& [k, v] : table) {
        if (k == e) {
            return v;
        }
    }
    return {};
}

template <typename E, std::size_t N>
std::optional<E> value_of(const std::array<std::pair<E, std::string_view>, N>& table,
                          std::string_view name) noexcept {
    for (const auto& [k, v] : table) {
        if (v == name) {
            return k;
        }
    }
    return std::nullopt;
}

value_kind kind_of(const json& j) {
    switch (j.type()) {
        case json::value_t::string:
            return value_kind::string;
        case json::value_t::number_integer:
        case json::value_t::number_unsigned:
            return value_kind::integer;
        case json::value_t::number_float:
            return value_kind::number;
        case json::value_t::boolean:
            return value_kind::boolean;
        case json::value_t::array:
            return value_kind::array;
        case json::value_t::object:
            return value_kind::object;
        default:
            return value_kind::null;
    }
}

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) {
        throw error(std::string("missing field '") + name + "'");
    }
    return *it;
}

const std::string& string_field(const json& j, const char* name) {
    const auto& f = field(j, name);
    if (!f.is_string()) {
        throw error(std::string("field '") + name + "' must be a string");
    }
    return f.get_ref<const std::string&>();
}

}  // namespace

std::string_view to_string(schema_kind kind) noexcept { return name_of(kSchemaKinds, kind); }

std::optional<schema_kind> parse_schema_kind(std::string_view name) noexcept {
    return value_of(kSchemaKinds, name);
}

std::string_view to_string(value_kind kind) noexcept { return name_of(kValueKinds, kind); }

std::optional<value_kind> parse_value_kind(std::string_view name) noexcept {
    return value_of(kValueKinds, name);
}

std::string_view to_string(param_location loc) noexcept { return name_of(kLocations, loc); }

std::optional<param_location> parse_param_location(std::string_view name) noexcept {
    return value_of(kLocations, name);
}

schema_type schema_type::of(schema_kind kind) {
    if (kind == schema_kind::enumeration || kind == schema_kind::array) {
        throw std::invalid_argument("schema_type::of: use enumeration() or array_of()");
    }
    schema_type t;
    t.kind_ = kind;
    return t;
}

schema_type schema_type::enumeration(std::vector<std::string> values) {
    if (values.empty()) {
        throw std::invalid_argument("enum schema type needs at least one value");
    }
    schema_type t;
    t.kind_ = schema_kind::enumeration;
    t.enum_values_ = std::move(values);
    return t;
}

schema_type schema_type::array_of(schema_type item) {
    schema_type t;
    t.kind_ = schema_kind::array;
    t.item_ = std::make_shared<const schema_type>(std::move(item));
    return t;
}

bool operator==(const schema_type& a, const schema_type& b) {
    if (a.kind_ != b.kind_ || a.enum_values_ != b.enum_values_) {
        return false;
    }
    if (!a.item_ || !b.item_) {
        return !a.item_ && !b.item_;
    }
    return *a.item_ == *b.item_;
}

value_kind classify(std::string_view raw_text) {
    auto parsed = json::parse(raw_text.begin(), raw_text.end(), nullptr, false);
    if (parsed.is_discarded()) {
        return value_kind::string;
    }
    return kind_of(parsed);
}

std::optional<example_value> example_value::from_text(std::string raw) {
    if (text::trim(raw).empty()) {
        return std::nullopt;
    }
    auto kind = classify(raw);
    return example_value(std::move(raw), kind);
}

std::optional<example_value> example_value::from_json(const json& node) {
    if (node.is_null() || node.is_discarded()) {
        return std::nullopt;
    }
    if (node.is_string()) {
        const auto& s = node.get_ref<const std::string&>();
        if (text::trim(s).empty()) {
            return std::nullopt;
        }
        if (classify(s) == value_kind::string) {
            return example_value(s, value_kind::string);
        }
        return example_value(node.dump(), value_kind::string);
    }
    return example_value(node.dump(), kind_of(node));
}

json example_value::to_json() const {
    auto parsed = json::parse(raw_.begin(), raw_.end(), nullptr, false);
    if (parsed.is_discarded()) {
        return json(raw_);
    }
    return parsed;
}

std::string example_value::text() const {
    if (kind_ != value_kind::string) {
        return raw_;
    }
    auto j = to_json();
    return j.is_string() ? j.get<std::string>() : raw_;
}

std::string example_value::folded() const { return text::ascii_lower(raw_); }

bool same_site(const api_parameter& a, const api_parameter& b) noexcept {
    return a.api_name == b.api_name && a.source_pointer == b.source_pointer;
}

json to_json(const schema_type& t) {
    json j = json::object();
    j["kind"] = std::string(to_string(t.kind()));
    j["enum_values"] = t.enum_values();
    if (t.item() != nullptr) {
        j["item_kind"] = to_json(*t.item());
    }
    return j;
}

json to_json(const example_value& v) {
    return json{{"raw_text", v.raw_text()}, {"parsed_kind", std::string(to_string(v.kind()))}};
}

json to_json(const api_parameter& p) {
    json examples = json::array();
    for (const auto& e : p.existing_examples) {
        examples.push_back(to_json(e));
    }
    return json{
        {"api_name", p.api_name},
        {"operation_id", p.operation_id},
        {"param_name", p.param_name},
        {"description", p.description},
        {"location", std::string(to_string(p.location))},
        {"required", p.required},
        {"declared_type", to_json(p.declared_type)},
        {"existing_examples", std::move(examples)},
        {"source_pointer", p.source_pointer},
    };
}

schema_type schema_type_from_json(const json& j) {
    if (!j.is_object()) {
        throw error("declared_type must be an object");
    }
    auto kind = parse_schema_kind(string_field(j, "kind"));
    if (!kind) {
        throw error("unknown schema kind '" + string_field(j, "kind") + "'");
    }
    const auto& values = field(j, "enum_values");
    if (!values.is_array()) {
        throw error("enum_values must be an array");
    }
    std::vector<std::string> enum_values;
    for (const auto& v : values) {
        if (!v.is_string()) {
            throw error("enum_values entries must be strings");
        }
        enum_values.push_back(v.get<std::string>());
    }
    bool has_item = j.contains("item_kind");
    if ((*kind == schema_kind::array) != has_item) {
        throw error("item_kind must be present exactly for array kinds");
    }
    if ((*kind == schema_kind::enumeration) != !enum_values.empty()) {
        throw error("enum_values must be non-empty exactly for enum kinds");
    }
    if (*kind == schema_kind::enumeration) {
        return schema_type::enumeration(std::move(enum_values));
    }
    if (*kind == schema_kind::array) {
        return schema_type::array_of(schema_type_from_json(j.at("item_kind")));
    }
    return schema_type::of(*kind);
}

example_value example_value_from_json(const json& j) {
    if (!j.is_object()) {
        throw error("example value must be an object");
    }
    auto value = example_value::from_text(string_field(j, "raw_text"));
    if (!value) {
        throw error("raw_text must not be blank");
    }
    auto kind = parse_value_kind(string_field(j, "parsed_kind"));
    if (!kind || *kind != value->kind()) {
        throw error("parsed_kind does not match raw_text");
    }
    return *value;
}

api_parameter api_parameter_from_json(const json& j) {
    if (!j.is_object()) {
        throw error("parameter must be an object");
    }
    api_parameter p;
    p.api_name = string_field(j, "api_name");
    p.operation_id = string_field(j, "operation_id");
    p.param_name = string_field(j, "param_name");
    if (p.param_name.empty()) {
        throw error("param_name must not be empty");
    }
    p.description = string_field(j, "description");
    auto loc = parse_param_location(string_field(j, "location"));
    if (!loc) {
        throw error("unknown location '" + string_field(j, "location") + "'");
    }
    p.location = *loc;
    const auto& req = field(j, "required");
    if (!req.is_boolean()) {
        throw error("required must be a boolean");
    }
    p.required = req.get<bool>();
    p.declared_type = schema_type_from_json(field(j, "declared_type"));
    const auto& examples = field(j, "existing_examples");
    if (!examples.is_array()) {
        throw error("existing_examples must be an array");
    }
    for (const auto& e : examples) {
        p.existing_examples.push_back(example_value_from_json(e));
    }
    p.source_pointer = string_field(j, "source_pointer");
    return p;
}

}  // namespace icicl
