#include "icicl/document.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "icicl/error.hpp"
#include "icicl/text.hpp"

namespace icicl {

namespace {

constexpr int kMaxDepth = 256;

std::pair<std::size_t, std::size_t> line_column(std::string_view bytes, std::size_t offset) {
    std::size_t line = 1;
    std::size_t column = 1;
    offset = std::min(offset, bytes.size());
    for (std::size_t i = 0; i < offset; ++i) {
        if (bytes[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

json parse_json(std::string_view bytes) {
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        // byte is 1-based and points just past the offending character.
        auto offset = e.byte > 0 ? e.byte - 1 : 0;
        auto [line, column] = line_column(bytes, offset);
        throw syntax_error(e.what(), line, column);
    }
}

// YAML 1.2 core schema scalar resolution for untagged plain scalars.
std::optional<json> resolve_plain_scalar(const std::string& s) {
    if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") {
        return json(nullptr);
    }
    if (s == "true" || s == "True" || s == "TRUE") {
        return json(true);
    }
    if (s == "false" || s == "False" || s == "FALSE") {
        return json(false);
    }
    static const std::regex int_re("[-+]?[0-9]+");
    static const std::regex oct_re("0o[0-7]+");
    static const std::regex hex_re("0x[0-9a-fA-F]+");
    static const std::regex float_re(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");
    static const std::regex inf_re(R"([-+]?\.(inf|Inf|INF))");
    static const std::regex nan_re(R"(\.(nan|NaN|NAN))");
    if (std::regex_match(s, int_re)) {
        const char* first = s.data() + (s[0] == '+' ? 1 : 0);
        const char* last = s.data() + s.size();
        std::int64_t v = 0;
        if (auto [p, ec] = std::from_chars(first, last, v); ec == std::errc{} && p == last) {
            return json(v);
        }
        std::uint64_t u = 0;
        if (auto [p, ec] = std::from_chars(first, last, u); ec == std::errc{} && p == last) {
            return json(u);
        }
        return json(std::strtod(s.c_str(), nullptr));
    }
    if (std::regex_match(s, oct_re) || std::regex_match(s, hex_re)) {
        int base = s[1] == 'o' ? 8 : 16;
        std::int64_t v = 0;
        const char* last = s.data() + s.size();
        if (auto [p, ec] = std::from_chars(s.data() + 2, last, v, base);
            ec == std::errc{} && p == last) {
            return json(v);
        }
        return std::nullopt;
    }
    if (std::regex_match(s, float_re)) {
        return json(std::strtod(s.c_str(), nullptr));
    }
    if (std::regex_match(s, inf_re)) {
        return json(s[0] == '-' ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity());
    }
    if (std::regex_match(s, nan_re)) {
        return json(std::numeric_limits<double>::quiet_NaN());
    }
    return std::nullopt;
}

json scalar_to_json(const YAML::Node& node) {
    const std::string& tag = node.Tag();
    const std::string& value = node.Scalar();
    if (tag == "!" || tag == "tag:yaml.org,2002:str") {
        return json(value);
    }
    if (tag == "?" || tag.empty() || tag.rfind("tag:yaml.org,2002:", 0) == 0) {
        if (auto resolved = resolve_plain_scalar(value)) {
            return *resolved;
        }
    }
    return json(value);
}

json yaml_to_json(const YAML::Node& node, int depth) {
    if (depth > kMaxDepth) {
        throw syntax_error("nesting too deep", node.Mark().line + 1, node.Mark().column + 1);
    }
    switch (node.Type()) {
        case YAML::NodeType::Undefined:
        case YAML::NodeType::Null:
            return json(nullptr);
        case YAML::NodeType::Scalar:
            return scalar_to_json(node);
        case YAML::NodeType::Sequence: {
            json out = json::array();
            for (const auto& item : node) {
                out.push_back(yaml_to_json(item, depth + 1));
            }
            return out;
        }
        case YAML::NodeType::Map: {
            json out = json::object();
            for (const auto& kv : node) {
                if (!kv.first.IsScalar()) {
                    auto mark = kv.first.Mark();
                    throw syntax_error("non-scalar mapping key", mark.line + 1, mark.column + 1);
                }
                out[kv.first.Scalar()] = yaml_to_json(kv.second, depth + 1);
            }
            return out;
        }
    }
    return json(nullptr);
}

json parse_yaml(std::string_view bytes) {
    try {
        YAML::Node node = YAML::Load(std::string(bytes));
        return yaml_to_json(node, 0);
    } catch (const YAML::ParserException& e) {
        throw syntax_error(e.msg, static_cast<std::size_t>(e.mark.line + 1),
                           static_cast<std::size_t>(e.mark.column + 1));
    } catch (const YAML::Exception& e) {
        throw syntax_error(e.msg, static_cast<std::size_t>(std::max(e.mark.line, 0) + 1),
                           static_cast<std::size_t>(std::max(e.mark.column, 0) + 1));
    }
}

bool looks_like_json(std::string_view bytes) {
    auto t = text::trim(bytes);
    return !t.empty() && (t.front() == '{' || t.front() == '[');
}

// ---------------------------------------------------------------------------
// YAML emitter. Block style, 2-space indent; strings are plain only when they
// cannot be read back as anything but the same string.

bool plain_safe(const std::string& s) {
    if (s.empty() || resolve_plain_scalar(s).has_value()) {
        return false;
    }
    if (s.front() == ' ' || s.back() == ' ' || s.back() == ':') {
        return false;
    }
    // Forms that YAML 1.1 readers would still turn into booleans, dates or numbers.
    static const std::set<std::string, std::less<>> yaml11_words{"y", "n", "yes", "no", "on", "off", "~"};
    if (yaml11_words.contains(text::ascii_lower(s))) {
        return false;
    }
    if (std::isdigit(static_cast<unsigned char>(s.front())) || s.front() == '+' || s.front() == '.') {
        bool numeric_like = std::all_of(s.begin(), s.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == ':' || c == '.' || c == '_' || c == '+' ||
                   c == '-';
        });
        if (numeric_like) {
            return false;
        }
    }
    static constexpr std::string_view indicators = "-?:,[]{}#&*!|>'\"%@`";
    if (indicators.find(s.front()) != std::string_view::npos) {
        return false;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto c = static_cast<unsigned char>(s[i]);
        if (c < 0x20 || c == 0x7F) {
            return false;
        }
        if (c == ':' && i + 1 < s.size() && s[i + 1] == ' ') {
            return false;
        }
        if (c == '#' && i > 0 && s[i - 1] == ' ') {
            return false;
        }
    }
    // Invalid UTF-8 goes through the quoting path, which replaces bad bytes.
    try {
        (void)json(s).dump();
    } catch (const json::type_error&) {
        return false;
    }
    return true;
}

std::string quoted(const std::string& s) {
    return json(s).dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string scalar_text(const json& node) {
    switch (node.type()) {
        case json::value_t::null:
            return "null";
        case json::value_t::boolean:
            return node.get<bool>() ? "true" : "false";
        case json::value_t::number_float: {
            double d = node.get<double>();
            if (std::isnan(d)) {
                return ".nan";
            }
            if (std::isinf(d)) {
                return d < 0 ? "-.inf" : ".inf";
            }
            return node.dump();
        }
        case json::value_t::string: {
            const auto& s = node.get_ref<const std::string&>();
            return plain_safe(s) ? s : quoted(s);
        }
        default:
            return node.dump();
    }
}

bool is_block(const json& node) {
    return (node.is_object() || node.is_array()) && !node.empty();
}

std::string inline_text(const json& node) {
    if (node.is_object()) {
        return "{}";
    }
    if (node.is_array()) {
        return "[]";
    }
    return scalar_text(node);
}

void emit_block(std::ostringstream& out, const json& node, std::size_t indent, bool first_inline);

// Emits `node` as the value of a key or sequence item whose header is already written.
void emit_value(std::ostringstream& out, const json& node, std::size_t indent) {
    if (!is_block(node)) {
        out << ' ' << inline_text(node) << '\n';
        return;
    }
    out << '\n';
    emit_block(out, node, indent, false);
}

void emit_block(std::ostringstream& out, const json& node, std::size_t indent, bool first_inline) {
    const std::string pad(indent, ' ');
    bool first = true;
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            if (!(first && first_inline)) {
                out << pad;
            }
            first = false;
            out << scalar_text(json(key)) << ':';
            emit_value(out, value, indent + 2);
        }
        return;
    }
    for (const auto& item : node) {
        if (!(first && first_inline)) {
            out << pad;
        }
        first = false;
        out << '-';
        if (is_block(item)) {
            out << ' ';
            emit_block(out, item, indent + 2, true);
        } else {
            out << ' ' << inline_text(item) << '\n';
        }
    }
}

}  // namespace

api_document parse_document(std::string_view bytes, format_hint hint) {
    api_document doc;
    switch (hint) {
        case format_hint::json:
            doc.root = parse_json(bytes);
            doc.format = document_format::json;
            break;
        case format_hint::yaml:
            doc.root = parse_yaml(bytes);
            doc.format = document_format::yaml;
            break;
        case format_hint::auto_detect:
            if (looks_like_json(bytes)) {
                try {
                    doc.root = parse_json(bytes);
                    doc.format = document_format::json;
                    break;
                } catch (const syntax_error& json_err) {
                    try {
                        doc.root = parse_yaml(bytes);
                        doc.format = document_format::yaml;
                        break;
                    } catch (const syntax_error&) {
                        throw json_err;
                    }
                }
            }
            doc.root = parse_yaml(bytes);
            doc.format = document_format::yaml;
            break;
    }
    return doc;
}

api_document load_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    auto ext = text::ascii_lower(path.extension().string());
    auto hint = ext == ".json"                    ? format_hint::json
                : (ext == ".yaml" || ext == ".yml") ? format_hint::yaml
                                                    : format_hint::auto_detect;
    auto doc = parse_document(buf.str(), hint);
    doc.name = path.stem().string();
    return doc;
}

std::string to_json_text(const json& node) {
    return node.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::string to_yaml_text(const json& node) {
    if (!is_block(node)) {
        return inline_text(node) + "\n";
    }
    std::ostringstream out;
    emit_block(out, node, 0, false);
    return out.str();
}

std::string serialize(const api_document& doc) {
    return doc.format == document_format::json ? to_json_text(doc.root) : to_yaml_text(doc.root);
}

namespace pointer {

std::string escape(std::string_view token) {
    std::string out;
    out.reserve(token.size());
    for (char c : token) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string append(std::string_view base, std::string_view token) {
    std::string out(base);
    out.push_back('/');
    out += escape(token);
    return out;
}

namespace {

template <typename Json>
Json* walk(Json* node, std::string_view ptr) noexcept {
    if (ptr.empty()) {
        return node;
    }
    if (ptr.front() != '/') {
        return nullptr;
    }
    std::size_t pos = 1;
    while (node != nullptr) {
        auto next = ptr.find('/', pos);
        auto raw = ptr.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        std::string token;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '~') {
                if (i + 1 >= raw.size() || (raw[i + 1] != '0' && raw[i + 1] != '1')) {
                    return nullptr;
                }
                token.push_back(raw[i + 1] == '0' ? '~' : '/');
                ++i;
            } else {
                token.push_back(raw[i]);
            }
        }
        if (node->is_object()) {
            auto it = node->find(token);
            if (it == node->end()) {
                return nullptr;
            }
            node = &*it;
        } else if (node->is_array()) {
            if (token.empty() || (token.size() > 1 && token[0] == '0')) {
                return nullptr;
            }
            std::size_t idx = 0;
            auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), idx);
            if (ec != std::errc{} || p != token.data() + token.size() || idx >= node->size()) {
                return nullptr;
            }
            node = &(*node)[idx];
        } else {
            return nullptr;
        }
        if (next == std::string_view::npos) {
            return node;
        }
        pos = next + 1;
    }
    return nullptr;
}

}  // namespace

const json* resolve(const json& root, std::string_view ptr) noexcept { return walk(&root, ptr); }

json* resolve(json& root, std::string_view ptr) noexcept { return walk(&root, ptr); }

}  // namespace pointer

}  // namespace icicl
