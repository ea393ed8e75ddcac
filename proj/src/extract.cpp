#include "icicl/extract.hpp"

#include <array>
#include <set>

#include "icicl/error.hpp"
#include "icicl/log.hpp"

namespace icicl {

namespace {

constexpr int kMaxRefHops = 32;
constexpr std::array<std::string_view, 8> kMethods{"get",     "put",  "post",  "delete",
                                                   "options", "head", "patch", "trace"};

bool is_method(std::string_view key) {
    for (auto m : kMethods) {
        if (m == key) {
            return true;
        }
    }
    return false;
}

std::string string_or_empty(const json& node, const char* key) {
    auto it = node.find(key);
    if (it != node.end() && it->is_string()) {
        return it->get<std::string>();
    }
    return {};
}

std::string slug(std::string_view title) {
    std::string out;
    for (char c : title) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            out.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!out.empty() && out.back() != '-') {
            out.push_back('-');
        }
    }
    while (!out.empty() && out.back() == '-') {
        out.pop_back();
    }
    return out;
}

void append_example(std::vector<example_value>& out, const json& node) {
    auto v = example_value::from_json(node);
    if (!v) {
        return;
    }
    for (const auto& existing : out) {
        if (existing.raw_text() == v->raw_text()) {
            return;
        }
    }
    out.push_back(std::move(*v));
}

// `example` then `examples` (array, or map of Example Objects) on one node.
void collect_examples(const json& root, const json& node, std::vector<example_value>& out) {
    if (!node.is_object()) {
        return;
    }
    if (auto it = node.find("example"); it != node.end()) {
        append_example(out, *it);
    }
    auto it = node.find("examples");
    if (it == node.end()) {
        return;
    }
    if (it->is_array()) {
        for (const auto& e : *it) {
            append_example(out, e);
        }
    } else if (it->is_object()) {
        for (const auto& [name, entry] : it->items()) {
            auto resolved = resolve_refs(root, entry, {});
            if (resolved.node == nullptr || !resolved.node->is_object()) {
                continue;
            }
            if (auto v = resolved.node->find("value"); v != resolved.node->end()) {
                append_example(out, *v);
            }
        }
    }
}

struct extractor {
    const json& root;
    spec_version version;
    std::string api_name;
    std::vector<operation_parameter> out;

    void add(api_parameter p, const std::string& path, const std::string& method) {
        if (p.param_name.empty()) {
            return;
        }
        out.push_back({std::move(p), path, method});
    }

    void body_fields(const json& schema_site, const std::string& site_ptr, const std::string& op_id,
                     const std::string& path, const std::string& method) {
        auto schema = resolve_refs(root, schema_site, site_ptr);
        if (schema.node == nullptr || !schema.node->is_object()) {
            return;
        }
        auto props = schema.node->find("properties");
        if (props == schema.node->end() || !props->is_object()) {
            return;
        }
        std::set<std::string> required;
        if (auto req = schema.node->find("required"); req != schema.node->end() && req->is_array()) {
            for (const auto& r : *req) {
                if (r.is_string()) {
                    required.insert(r.get<std::string>());
                }
            }
        }
        auto props_ptr = pointer::append(schema.pointer, "properties");
        for (const auto& [name, prop_site] : props->items()) {
            auto prop_ptr = pointer::append(props_ptr, name);
            auto prop = resolve_refs(root, prop_site, prop_ptr);
            if (prop.node == nullptr || !prop.node->is_object()) {
                continue;
            }
            auto type = schema_type_of(root, *prop.node);
            if (type.kind() == schema_kind::object || type.kind() == schema_kind::array) {
                continue;
            }
            api_parameter p;
            p.api_name = api_name;
            p.operation_id = op_id;
            p.param_name = name;
            p.description = string_or_empty(*prop.node, "description");
            p.location = param_location::body_field;
            p.required = required.contains(name);
            p.declared_type = std::move(type);
            collect_examples(root, *prop.node, p.existing_examples);
            p.source_pointer = prop_ptr;
            add(std::move(p), path, method);
        }
    }

    void parameter(const json& site, const std::string& site_ptr, const std::string& op_id,
                   const std::string& path, const std::string& method) {
        auto resolved = resolve_refs(root, site, site_ptr);
        if (resolved.node == nullptr || !resolved.node->is_object()) {
            log::warn("skipping unresolvable parameter at " + site_ptr);
            return;
        }
        const json& node = *resolved.node;
        auto in = string_or_empty(node, "in");
        if (version == spec_version::swagger2 && in == "body") {
            if (auto s = node.find("schema"); s != node.end()) {
                body_fields(*s, pointer::append(site_ptr, "schema"), op_id, path, method);
            }
            return;
        }
        api_parameter p;
        if (in == "path") {
            p.location = param_location::path;
        } else if (in == "query") {
            p.location = param_location::query;
        } else if (in == "header") {
            p.location = param_location::header;
        } else if (in == "cookie") {
            p.location = param_location::cookie;
        } else if (in == "formData" && version == spec_version::swagger2) {
            p.location = param_location::body_field;
        } else {
            log::warn("skipping parameter with unsupported location '" + in + "' at " + site_ptr);
            return;
        }
        p.api_name = api_name;
        p.operation_id = op_id;
        p.param_name = string_or_empty(node, "name");
        p.description = string_or_empty(node, "description");
        if (auto r = node.find("required"); r != node.end() && r->is_boolean()) {
            p.required = r->get<bool>();
        }
        if (p.location == param_location::path) {
            p.required = true;
        }
        collect_examples(root, node, p.existing_examples);
        if (version == spec_version::swagger2) {
            if (auto x = node.find("x-example"); x != node.end()) {
                append_example(p.existing_examples, *x);
            }
            p.declared_type = schema_type_of(root, node);
        } else {
            const json* schema = nullptr;
            if (auto s = node.find("schema"); s != node.end()) {
                schema = &*s;
            } else if (auto c = node.find("content"); c != node.end() && c->is_object() && !c->empty()) {
                if (auto s2 = c->begin()->find("schema"); s2 != c->begin()->end()) {
                    schema = &*s2;
                }
            }
            if (schema != nullptr) {
                auto rs = resolve_refs(root, *schema, {});
                if (rs.node != nullptr) {
                    p.declared_type = schema_type_of(root, *rs.node);
                    collect_examples(root, *rs.node, p.existing_examples);
                }
            }
        }
        p.source_pointer = site_ptr;
        add(std::move(p), path, method);
    }

    void request_body(const json& op, const std::string& op_ptr, const std::string& op_id,
                      const std::string& path, const std::string& method) {
        auto rb_it = op.find("requestBody");
        if (rb_it == op.end()) {
            return;
        }
        auto rb = resolve_refs(root, *rb_it, pointer::append(op_ptr, "requestBody"));
        if (rb.node == nullptr || !rb.node->is_object()) {
            return;
        }
        auto content = rb.node->find("content");
        if (content == rb.node->end() || !content->is_object()) {
            return;
        }
        auto chosen = content->find("application/json");
        if (chosen == content->end() || !chosen->contains("schema")) {
            chosen = content->end();
            for (auto it = content->begin(); it != content->end(); ++it) {
                if (it->is_object() && it->contains("schema")) {
                    chosen = it;
                    break;
                }
            }
        }
        if (chosen == content->end()) {
            return;
        }
        auto media_ptr = pointer::append(pointer::append(rb.pointer, "content"), chosen.key());
        body_fields(chosen->at("schema"), pointer::append(media_ptr, "schema"), op_id, path, method);
    }

    void operation(const std::string& path, const std::string& path_ptr, const json& path_item,
                   const std::string& method, const json& op) {
        auto op_ptr = pointer::append(path_ptr, method);
        auto op_id = string_or_empty(op, "operationId");
        if (op_id.empty()) {
            op_id = method + " " + path;
        }

        // Path-level parameters apply unless the operation overrides (name, in).
        std::set<std::pair<std::string, std::string>> overridden;
        auto op_params = op.find("parameters");
        if (op_params != op.end() && op_params->is_array()) {
            for (const auto& site : *op_params) {
                auto r = resolve_refs(root, site, {});
                if (r.node != nullptr && r.node->is_object()) {
                    overridden.emplace(string_or_empty(*r.node, "name"), string_or_empty(*r.node, "in"));
                }
            }
        }
        if (auto shared = path_item.find("parameters"); shared != path_item.end() && shared->is_array()) {
            auto shared_ptr = pointer::append(path_ptr, "parameters");
            for (std::size_t i = 0; i < shared->size(); ++i) {
                const auto& site = (*shared)[i];
                auto r = resolve_refs(root, site, {});
                if (r.node != nullptr && r.node->is_object() &&
                    overridden.contains({string_or_empty(*r.node, "name"), string_or_empty(*r.node, "in")})) {
                    continue;
                }
                parameter(site, pointer::append(shared_ptr, std::to_string(i)), op_id, path, method);
            }
        }
        if (op_params != op.end() && op_params->is_array()) {
            auto params_ptr = pointer::append(op_ptr, "parameters");
            for (std::size_t i = 0; i < op_params->size(); ++i) {
                parameter((*op_params)[i], pointer::append(params_ptr, std::to_string(i)), op_id, path,
                          method);
            }
        }
        if (version != spec_version::swagger2) {
            request_body(op, op_ptr, op_id, path, method);
        }
    }

    void run() {
        auto paths = root.find("paths");
        if (paths == root.end() || !paths->is_object()) {
            return;
        }
        for (const auto& [path, item_site] : paths->items()) {
            auto path_ptr = pointer::append("/paths", path);
            auto item = resolve_refs(root, item_site, path_ptr);
            if (item.node == nullptr || !item.node->is_object()) {
                continue;
            }
            for (const auto& [key, op] : item.node->items()) {
                if (is_method(key) && op.is_object()) {
                    operation(path, item.pointer, *item.node, key, op);
                }
            }
        }
    }
};

}  // namespace

spec_version detect_version(const json& root) {
    if (root.is_object()) {
        if (auto it = root.find("openapi"); it != root.end()) {
            std::string v = it->is_string() ? it->get<std::string>() : it->is_number() ? it->dump() : "";
            if (v.rfind("3.1", 0) == 0) {
                return spec_version::openapi31;
            }
            if (v.rfind("3.", 0) == 0 || v == "3") {
                return spec_version::openapi30;
            }
        }
        if (auto it = root.find("swagger"); it != root.end()) {
            std::string v = it->is_string() ? it->get<std::string>() : it->is_number() ? it->dump() : "";
            if (v == "2.0" || v == "2") {
                return spec_version::swagger2;
            }
        }
    }
    throw unsupported_version("no recognizable 'openapi: 3.x' or 'swagger: 2.0' field");
}

resolved_node resolve_refs(const json& root, const json& node, std::string ptr) {
    const json* current = &node;
    for (int hop = 0; hop < kMaxRefHops; ++hop) {
        if (!current->is_object()) {
            return {current, std::move(ptr)};
        }
        auto ref = current->find("$ref");
        if (ref == current->end() || !ref->is_string()) {
            return {current, std::move(ptr)};
        }
        const auto& target = ref->get_ref<const std::string&>();
        if (target.empty() || target[0] != '#') {
            return {nullptr, std::move(ptr)};
        }
        ptr = target.substr(1);
        current = pointer::resolve(root, ptr);
        if (current == nullptr) {
            return {nullptr, std::move(ptr)};
        }
    }
    return {nullptr, std::move(ptr)};
}

schema_type schema_type_of(const json& root, const json& schema_site) {
    auto resolved = resolve_refs(root, schema_site, {});
    if (resolved.node == nullptr || !resolved.node->is_object()) {
        return schema_type::of(schema_kind::unknown);
    }
    const json& s = *resolved.node;
    if (auto e = s.find("enum"); e != s.end() && e->is_array() && !e->empty()) {
        std::vector<std::string> values;
        for (const auto& v : *e) {
            values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
        return schema_type::enumeration(std::move(values));
    }
    std::string type;
    if (auto t = s.find("type"); t != s.end()) {
        if (t->is_string()) {
            type = t->get<std::string>();
        } else if (t->is_array()) {
            for (const auto& alt : *t) {
                if (alt.is_string() && alt.get<std::string>() != "null") {
                    type = alt.get<std::string>();
                    break;
                }
            }
        }
    } else if (s.contains("properties")) {
        type = "object";
    } else if (s.contains("items")) {
        type = "array";
    }
    if (type == "string") {
        auto format = string_or_empty(s, "format");
        if (format == "date" || format == "date-time") {
            return schema_type::of(schema_kind::datetime);
        }
        return schema_type::of(schema_kind::string);
    }
    if (type == "integer") {
        return schema_type::of(schema_kind::integer);
    }
    if (type == "number") {
        return schema_type::of(schema_kind::number);
    }
    if (type == "boolean") {
        return schema_type::of(schema_kind::boolean);
    }
    if (type == "object") {
        return schema_type::of(schema_kind::object);
    }
    if (type == "array") {
        auto items = s.find("items");
        if (items == s.end()) {
            return schema_type::array_of(schema_type::of(schema_kind::unknown));
        }
        return schema_type::array_of(schema_type_of(root, *items));
    }
    return schema_type::of(schema_kind::unknown);
}

std::vector<operation_parameter> extract_operation_parameters(const api_document& doc) {
    auto version = detect_version(doc.root);
    std::string api_name = doc.name;
    if (api_name.empty()) {
        if (auto info = doc.root.find("info"); info != doc.root.end() && info->is_object()) {
            api_name = slug(string_or_empty(*info, "title"));
        }
    }
    if (api_name.empty()) {
        api_name = "api";
    }
    extractor ex{doc.root, version, api_name, {}};
    ex.run();
    return std::move(ex.out);
}

std::vector<api_parameter> extract_parameters(const api_document& doc) {
    std::vector<api_parameter> out;
    for (auto& op : extract_operation_parameters(doc)) {
        out.push_back(std::move(op.parameter));
    }
    return out;
}

}  // namespace icicl
