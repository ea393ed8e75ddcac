#include "icicl/validate.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <string_view>
#include <utility>

#include "icicl/error.hpp"
#include "icicl/extract.hpp"

namespace icicl::validate {

namespace {

using keyword_set = std::set<std::string_view>;

const keyword_set kMethods{"get", "put", "post", "delete", "options", "head", "patch", "trace"};

const keyword_set kPathItemKeys{"$ref", "summary", "description", "servers", "parameters"};

const keyword_set kSchema30{
    "title", "multipleOf", "maximum", "exclusiveMaximum", "minimum", "exclusiveMinimum", "maxLength",
    "minLength", "pattern", "maxItems", "minItems", "uniqueItems", "maxProperties", "minProperties",
    "required", "enum", "type", "allOf", "oneOf", "anyOf", "not", "items", "properties",
    "additionalProperties", "description", "format", "default", "nullable", "discriminator", "readOnly",
    "writeOnly", "xml", "externalDocs", "example", "deprecated", "$ref"};

const keyword_set kSchema20{
    "$ref", "format", "title", "description", "default", "multipleOf", "maximum", "exclusiveMaximum",
    "minimum", "exclusiveMinimum", "maxLength", "minLength", "pattern", "maxItems", "minItems",
    "uniqueItems", "maxProperties", "minProperties", "required", "enum", "type", "items", "allOf",
    "properties", "additionalProperties", "discriminator", "readOnly", "xml", "externalDocs", "example"};

const keyword_set kParam3{"name", "in", "description", "required", "deprecated", "allowEmptyValue", "style",
                          "explode", "allowReserved", "schema", "example", "examples", "content"};

const keyword_set kParam20Body{"name", "in", "description", "required", "schema"};

const keyword_set kParam20Other{
    "name", "in", "description", "required", "type", "format", "allowEmptyValue", "items",
    "collectionFormat", "default", "maximum", "exclusiveMaximum", "minimum", "exclusiveMinimum",
    "maxLength", "minLength", "pattern", "maxItems", "minItems", "uniqueItems", "enum", "multipleOf"};

const keyword_set kTypes30{"string", "number", "integer", "boolean", "array", "object"};
const keyword_set kTypes31{"string", "number", "integer", "boolean", "array", "object", "null"};
const keyword_set kTypes20Param{"string", "number", "integer", "boolean", "array", "file"};

bool is_extension(std::string_view key) { return key.starts_with("x-"); }

class checker {
public:
    explicit checker(const json& root) : root_(root) {}

    std::vector<issue> run() {
        if (!root_.is_object()) {
            add("", "document root must be an object");
            return std::move(issues_);
        }
        try {
            version_ = detect_version(root_);
        } catch (const unsupported_version& e) {
            add("", e.what());
            return std::move(issues_);
        }
        check_info();
        check_paths();
        check_components();
        check_refs(root_, "");
        return std::move(issues_);
    }

private:
    void add(std::string ptr, std::string message) { issues_.push_back({std::move(ptr), std::move(message)}); }

    bool v3() const { return version_ != spec_version::swagger2; }

    void check_info() {
        auto it = root_.find("info");
        if (it == root_.end() || !it->is_object()) {
            add("/info", "info object is required");
            return;
        }
        for (const char* key : {"title", "version"}) {
            if (!it->contains(key) || !(*it)[key].is_string()) {
                add(pointer::append("/info", key), std::string("info.") + key + " must be a string");
            }
        }
    }

    void check_paths() {
        auto it = root_.find("paths");
        if (it == root_.end()) {
            if (version_ != spec_version::openapi31) {
                add("/paths", "paths object is required");
            }
            return;
        }
        if (!it->is_object()) {
            add("/paths", "paths must be an object");
            return;
        }
        for (const auto& [path, item] : it->items()) {
            const auto ptr = pointer::append("/paths", path);
            if (is_extension(path)) {
                continue;
            }
            if (path.empty() || path[0] != '/') {
                add(ptr, "path must start with '/'");
            }
            check_path_item(path, item, ptr);
        }
    }

    void check_path_item(const std::string& path, const json& item, const std::string& ptr) {
        if (!item.is_object()) {
            add(ptr, "path item must be an object");
            return;
        }
        std::vector<std::pair<const json*, std::string>> shared;
        if (auto p = item.find("parameters"); p != item.end()) {
            shared = parameter_list(*p, pointer::append(ptr, "parameters"));
        }
        for (const auto& [key, value] : item.items()) {
            if (is_extension(key) || kPathItemKeys.contains(key)) {
                continue;
            }
            if (!kMethods.contains(key) || (!v3() && key == "trace")) {
                add(pointer::append(ptr, key), "unexpected path item key");
                continue;
            }
            check_operation(path, value, pointer::append(ptr, key), shared);
        }
    }

    std::vector<std::pair<const json*, std::string>> parameter_list(const json& list, const std::string& ptr) {
        std::vector<std::pair<const json*, std::string>> out;
        if (!list.is_array()) {
            add(ptr, "parameters must be an array");
            return out;
        }
        std::set<std::pair<std::string, std::string>> seen;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto item_ptr = pointer::append(ptr, std::to_string(i));
            auto resolved = resolve_refs(root_, list[i], item_ptr);
            if (resolved.node == nullptr) {
                continue;  // reported by check_refs
            }
            if (!check_parameter(*resolved.node, resolved.pointer == item_ptr ? item_ptr : resolved.pointer)) {
                continue;
            }
            const auto& node = *resolved.node;
            auto key = std::make_pair(node["name"].get<std::string>(), node["in"].get<std::string>());
            if (!seen.insert(key).second) {
                add(item_ptr, "duplicate parameter " + key.first + " in " + key.second);
            }
            out.emplace_back(resolved.node, item_ptr);
        }
        return out;
    }

    void check_operation(const std::string& path, const json& op, const std::string& ptr,
                         const std::vector<std::pair<const json*, std::string>>& shared) {
        if (!op.is_object()) {
            add(ptr, "operation must be an object");
            return;
        }
        if (auto id = op.find("operationId"); id != op.end()) {
            if (!id->is_string()) {
                add(pointer::append(ptr, "operationId"), "operationId must be a string");
            } else if (!operation_ids_.insert(id->get<std::string>()).second) {
                add(pointer::append(ptr, "operationId"), "duplicate operationId " + id->get<std::string>());
            }
        }
        auto responses = op.find("responses");
        if (responses == op.end()) {
            if (version_ != spec_version::openapi31) {
                add(pointer::append(ptr, "responses"), "responses object is required");
            }
        } else if (!responses->is_object() || (version_ != spec_version::openapi31 && responses->empty())) {
            add(pointer::append(ptr, "responses"), "responses must be a non-empty object");
        }

        std::vector<std::pair<const json*, std::string>> own;
        if (auto p = op.find("parameters"); p != op.end()) {
            own = parameter_list(*p, pointer::append(ptr, "parameters"));
        }
        std::set<std::string> path_params;
        auto collect = [&](const auto& list) {
            for (const auto& [node, node_ptr] : list) {
                if ((*node)["in"] == "path") {
                    path_params.insert((*node)["name"].template get<std::string>());
                }
            }
        };
        collect(shared);
        collect(own);

        int body_count = 0;
        for (const auto& [node, node_ptr] : own) {
            body_count += (*node)["in"] == "body";
        }
        for (const auto& [node, node_ptr] : shared) {
            body_count += (*node)["in"] == "body";
        }
        if (body_count > 1) {
            add(ptr, "operation has more than one body parameter");
        }

        static const std::regex var_re(R"(\{([^{}]+)\})");
        std::set<std::string> template_vars;
        for (auto it = std::sregex_iterator(path.begin(), path.end(), var_re); it != std::sregex_iterator(); ++it) {
            template_vars.insert((*it)[1].str());
        }
        for (const auto& var : template_vars) {
            if (!path_params.contains(var)) {
                add(ptr, "path template variable {" + var + "} has no path parameter");
            }
        }
        for (const auto& name : path_params) {
            if (!template_vars.contains(name)) {
                add(ptr, "path parameter " + name + " does not appear in the path template");
            }
        }

        if (auto rb = op.find("requestBody"); rb != op.end()) {
            if (!v3()) {
                add(pointer::append(ptr, "requestBody"), "requestBody is not allowed in Swagger 2.0");
            } else {
                check_request_body(*rb, pointer::append(ptr, "requestBody"));
            }
        }
    }

    void check_request_body(const json& body, const std::string& ptr) {
        auto resolved = resolve_refs(root_, body, ptr);
        if (resolved.node == nullptr || resolved.pointer != ptr) {
            return;  // components are checked once
        }
        if (!body.is_object() || !body.contains("content") || !body["content"].is_object()) {
            add(ptr, "requestBody requires a content object");
            return;
        }
        check_content(body["content"], pointer::append(ptr, "content"));
    }

    void check_content(const json& content, const std::string& ptr) {
        for (const auto& [type, media] : content.items()) {
            const auto media_ptr = pointer::append(ptr, type);
            if (!media.is_object()) {
                add(media_ptr, "media type must be an object");
                continue;
            }
            if (auto s = media.find("schema"); s != media.end()) {
                check_schema(*s, pointer::append(media_ptr, "schema"));
            }
        }
    }

    void check_keys(const json& node, const keyword_set& allowed, const std::string& ptr, std::string_view what) {
        for (const auto& [key, value] : node.items()) {
            if (!is_extension(key) && !allowed.contains(key)) {
                add(pointer::append(ptr, key), std::string("keyword not allowed in ") + std::string(what));
            }
        }
    }

    bool check_parameter(const json& param, const std::string& ptr) {
        if (!param.is_object()) {
            add(ptr, "parameter must be an object");
            return false;
        }
        if (!param.contains("name") || !param["name"].is_string() || param["name"].get<std::string>().empty()) {
            add(ptr, "parameter name must be a non-empty string");
            return false;
        }
        if (!param.contains("in") || !param["in"].is_string()) {
            add(ptr, "parameter in must be a string");
            return false;
        }
        if (!checked_parameters_.insert(ptr).second) {
            return true;
        }
        const auto in = param["in"].get<std::string>();
        static const keyword_set in3{"path", "query", "header", "cookie"};
        static const keyword_set in2{"path", "query", "header", "body", "formData"};
        if (!(v3() ? in3 : in2).contains(in)) {
            add(pointer::append(ptr, "in"), "invalid parameter location " + in);
            return false;
        }
        if (in == "path" && param.value("required", false) != true) {
            add(pointer::append(ptr, "required"), "path parameters must be required");
        }
        if (auto r = param.find("required"); r != param.end() && !r->is_boolean()) {
            add(pointer::append(ptr, "required"), "required must be a boolean");
        }
        if (v3()) {
            check_keys(param, kParam3, ptr, "parameter");
            const bool has_schema = param.contains("schema");
            const bool has_content = param.contains("content");
            if (has_schema == has_content) {
                add(ptr, "parameter needs exactly one of schema or content");
            }
            if (param.contains("example") && param.contains("examples")) {
                add(ptr, "parameter has both example and examples");
            }
            if (auto e = param.find("examples"); e != param.end() && !e->is_object()) {
                add(pointer::append(ptr, "examples"), "parameter examples must be a map");
            }
            if (has_schema) {
                check_schema(param["schema"], pointer::append(ptr, "schema"));
            }
            if (has_content) {
                if (!param["content"].is_object() || param["content"].size() != 1) {
                    add(pointer::append(ptr, "content"), "parameter content must have exactly one entry");
                } else {
                    check_content(param["content"], pointer::append(ptr, "content"));
                }
            }
        } else if (in == "body") {
            check_keys(param, kParam20Body, ptr, "body parameter");
            if (!param.contains("schema")) {
                add(ptr, "body parameter requires a schema");
            } else {
                check_schema(param["schema"], pointer::append(ptr, "schema"));
            }
        } else {
            check_keys(param, kParam20Other, ptr, "parameter");
            auto t = param.find("type");
            if (t == param.end() || !t->is_string() || !kTypes20Param.contains(t->get<std::string>())) {
                add(pointer::append(ptr, "type"), "non-body parameter requires a valid type");
            } else if (*t == "array" && !param.contains("items")) {
                add(ptr, "array parameter requires items");
            }
            check_enum(param, ptr);
        }
        return true;
    }

    void check_enum(const json& node, const std::string& ptr) {
        auto e = node.find("enum");
        if (e == node.end()) {
            return;
        }
        const auto enum_ptr = pointer::append(ptr, "enum");
        if (!e->is_array() || e->empty()) {
            add(enum_ptr, "enum must be a non-empty array");
            return;
        }
        for (std::size_t i = 0; i < e->size(); ++i) {
            for (std::size_t j = i + 1; j < e->size(); ++j) {
                if ((*e)[i] == (*e)[j]) {
                    add(pointer::append(enum_ptr, std::to_string(j)), "enum values must be unique");
                }
            }
        }
        if (auto d = node.find("default"); d != node.end() && std::find(e->begin(), e->end(), *d) == e->end()) {
            add(pointer::append(ptr, "default"), "default must be one of the enum values");
        }
    }

    void check_schema(const json& schema, const std::string& ptr, int depth = 0) {
        if (depth > 64) {
            return;
        }
        if (version_ == spec_version::openapi31 && schema.is_boolean()) {
            return;
        }
        if (!schema.is_object()) {
            add(ptr, "schema must be an object");
            return;
        }
        if (schema.contains("$ref")) {
            if (version_ != spec_version::openapi31 && schema.size() > 1) {
                bool only_ext = true;
                for (const auto& [key, value] : schema.items()) {
                    only_ext = only_ext && (key == "$ref" || is_extension(key));
                }
                if (!only_ext) {
                    add(ptr, "sibling keywords next to $ref are ignored");
                }
            }
            return;
        }
        if (!checked_schemas_.insert(ptr).second) {
            return;
        }
        switch (version_) {
            case spec_version::openapi30: check_keys(schema, kSchema30, ptr, "schema"); break;
            case spec_version::swagger2: check_keys(schema, kSchema20, ptr, "schema"); break;
            case spec_version::openapi31: break;
        }
        if (auto t = schema.find("type"); t != schema.end()) {
            const auto& allowed = version_ == spec_version::openapi31 ? kTypes31 : kTypes30;
            if (t->is_string()) {
                if (!allowed.contains(t->get<std::string>())) {
                    add(pointer::append(ptr, "type"), "invalid schema type");
                }
            } else if (t->is_array() && version_ == spec_version::openapi31) {
                for (const auto& each : *t) {
                    if (!each.is_string() || !allowed.contains(each.get<std::string>())) {
                        add(pointer::append(ptr, "type"), "invalid schema type");
                    }
                }
            } else {
                add(pointer::append(ptr, "type"), "schema type must be a string");
            }
        }
        if (auto e = schema.find("examples"); e != schema.end() && !e->is_array()) {
            add(pointer::append(ptr, "examples"), "schema examples must be an array");
        }
        check_enum(schema, ptr);
        if (auto p = schema.find("properties"); p != schema.end()) {
            if (!p->is_object()) {
                add(pointer::append(ptr, "properties"), "properties must be an object");
            } else {
                for (const auto& [name, sub] : p->items()) {
                    check_schema(sub, pointer::append(pointer::append(ptr, "properties"), name), depth + 1);
                }
            }
        }
        if (auto i = schema.find("items"); i != schema.end()) {
            check_schema(*i, pointer::append(ptr, "items"), depth + 1);
        } else if (version_ == spec_version::openapi30 && schema.value("type", json()) == "array") {
            add(ptr, "array schema requires items");
        }
        for (const char* key : {"allOf", "anyOf", "oneOf"}) {
            auto it = schema.find(key);
            if (it == schema.end()) {
                continue;
            }
            if (!it->is_array() || it->empty()) {
                add(pointer::append(ptr, key), std::string(key) + " must be a non-empty array");
                continue;
            }
            for (std::size_t i = 0; i < it->size(); ++i) {
                check_schema((*it)[i], pointer::append(pointer::append(ptr, key), std::to_string(i)), depth + 1);
            }
        }
        if (auto n = schema.find("not"); n != schema.end()) {
            check_schema(*n, pointer::append(ptr, "not"), depth + 1);
        }
        if (auto a = schema.find("additionalProperties"); a != schema.end() && !a->is_boolean()) {
            check_schema(*a, pointer::append(ptr, "additionalProperties"), depth + 1);
        }
    }

    void check_components() {
        const char* container = v3() ? "components" : nullptr;
        const json* schemas = nullptr;
        std::string base;
        if (container != nullptr) {
            auto c = root_.find("components");
            if (c != root_.end() && c->is_object() && c->contains("schemas")) {
                schemas = &(*c)["schemas"];
                base = "/components/schemas";
            }
            if (c != root_.end() && c->is_object() && c->contains("parameters") && (*c)["parameters"].is_object()) {
                for (const auto& [name, param] : (*c)["parameters"].items()) {
                    if (!param.contains("$ref")) {
                        check_parameter(param, pointer::append("/components/parameters", name));
                    }
                }
            }
        } else if (auto d = root_.find("definitions"); d != root_.end()) {
            schemas = &*d;
            base = "/definitions";
        }
        if (schemas == nullptr) {
            return;
        }
        if (!schemas->is_object()) {
            add(base, "schema container must be an object");
            return;
        }
        for (const auto& [name, schema] : schemas->items()) {
            check_schema(schema, pointer::append(base, name));
        }
    }

    void check_refs(const json& node, const std::string& ptr) {
        if (node.is_object()) {
            for (const auto& [key, value] : node.items()) {
                const auto child = pointer::append(ptr, key);
                if (key == "$ref" && value.is_string()) {
                    const auto& target = value.get_ref<const std::string&>();
                    if (!target.empty() && target[0] == '#' &&
                        pointer::resolve(root_, std::string_view(target).substr(1)) == nullptr) {
                        add(child, "unresolved reference " + target);
                    }
                    continue;
                }
                check_refs(value, child);
            }
        } else if (node.is_array()) {
            for (std::size_t i = 0; i < node.size(); ++i) {
                check_refs(node[i], pointer::append(ptr, std::to_string(i)));
            }
        }
    }

    const json& root_;
    spec_version version_ = spec_version::openapi30;
    std::vector<issue> issues_;
    std::set<std::string> operation_ids_;
    std::set<std::string> checked_parameters_;
    std::set<std::string> checked_schemas_;
};

}  // namespace

std::vector<issue> check(const json& root) { return checker(root).run(); }

}  // namespace icicl::validate
