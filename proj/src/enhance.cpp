#include "icicl/enhance.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "icicl/error.hpp"
#include "icicl/extract.hpp"

namespace icicl::enhance {

namespace {

constexpr int kMaxRefHops = 32;

struct site {
    api_parameter parameter;
    std::vector<std::pair<std::string, std::string>> operations;  // (path, method)
};

std::map<std::string, site> sites_of(const api_document& doc) {
    std::map<std::string, site> out;
    for (auto& op : extract_operation_parameters(doc)) {
        auto& s = out[op.parameter.source_pointer];
        if (s.operations.empty()) {
            s.parameter = op.parameter;
        }
        s.operations.emplace_back(op.path, op.method);
    }
    return out;
}

// Replaces an in-document $ref node by a copy of its target, repeatedly.
void inline_ref(json& node, const json& lookup_root) {
    for (int hop = 0; hop < kMaxRefHops; ++hop) {
        if (!node.is_object()) {
            return;
        }
        auto ref = node.find("$ref");
        if (ref == node.end() || !ref->is_string()) {
            return;
        }
        const auto& target = ref->get_ref<const std::string&>();
        if (target.empty() || target[0] != '#') {
            return;
        }
        const json* resolved = pointer::resolve(lookup_root, std::string_view(target).substr(1));
        if (resolved == nullptr) {
            return;
        }
        json copy = *resolved;
        node = std::move(copy);
    }
}

json values_of(const postprocess::example_set& set) {
    json out = json::array();
    for (const auto& e : set.examples) {
        out.push_back(e.to_json());
    }
    return out;
}

bool is_parameter_object(const json& node) { return node.is_object() && node.contains("in"); }

// Schema node of an OpenAPI 3 parameter, inlined so that edits stay local.
json& parameter_schema(json& param, const json& root) {
    if (auto s = param.find("schema"); s != param.end()) {
        inline_ref(*s, root);
        return *s;
    }
    if (auto c = param.find("content"); c != param.end() && c->is_object() && !c->empty()) {
        auto& media = c->begin().value();
        if (media.is_object()) {
            if (!media.contains("schema")) {
                media["schema"] = json::object();
            }
            inline_ref(media["schema"], root);
            return media["schema"];
        }
    }
    param["schema"] = json::object();
    return param["schema"];
}

json& node_at(json& root, const std::string& ptr, const json& lookup_root) {
    json* node = pointer::resolve(root, ptr);
    if (node == nullptr) {
        throw pointer_miss(ptr);
    }
    inline_ref(*node, lookup_root);
    return *node;
}

void check_assignments(const plan& p, const std::map<std::string, site>& sites, const json& root) {
    for (const auto& [ptr, set] : p.assignments) {
        if (!sites.contains(ptr) || pointer::resolve(root, ptr) == nullptr) {
            throw pointer_miss(ptr);
        }
        if (set.examples.empty()) {
            throw std::invalid_argument("example set for " + ptr + " is empty");
        }
    }
}

void apply_doc(json& root, const json& original, spec_version version, const std::string& ptr,
               const postprocess::example_set& set) {
    json& node = node_at(root, ptr, original);
    const json values = values_of(set);
    const json first = values.front();
    if (is_parameter_object(node) && version == spec_version::swagger2) {
        for (const char* key : {"example", "examples", "x-example", "x-examples"}) {
            node.erase(key);
        }
        node["x-example"] = first;
        node["x-examples"] = values;
        return;
    }
    json* schema = &node;
    if (is_parameter_object(node)) {
        node.erase("example");
        node.erase("examples");
        schema = &parameter_schema(node, original);
    }
    for (const char* key : {"example", "examples", "x-examples"}) {
        schema->erase(key);
    }
    if (version == spec_version::openapi31) {
        (*schema)["examples"] = values;
    } else {
        (*schema)["example"] = first;
        (*schema)["x-examples"] = values;
    }
}

// An enum constraint must admit the default, so a default outside it is dropped.
void constrain(json& node, const json& values) {
    node["enum"] = values;
    if (auto d = node.find("default"); d != node.end() &&
        std::find(values.begin(), values.end(), *d) == values.end()) {
        node.erase(d);
    }
}

void apply_fuzz(json& root, const json& original, spec_version version, const std::string& ptr,
                const postprocess::example_set& set) {
    json& node = node_at(root, ptr, original);
    const json values = values_of(set);
    const json first = values.front();
    if (is_parameter_object(node) && version == spec_version::swagger2) {
        node.erase("example");
        node.erase("x-example");
        constrain(node, values);
        node["x-example"] = first;
        return;
    }
    if (is_parameter_object(node)) {
        node.erase("example");
        node.erase("examples");
        json& schema = parameter_schema(node, original);
        schema.erase("example");
        schema.erase("examples");
        constrain(schema, values);
        node["example"] = first;
        return;
    }
    node.erase("example");
    node.erase("examples");
    constrain(node, values);
    node["example"] = first;
}

bool is_method(std::string_view key) {
    static const std::set<std::string_view> methods{"get", "put", "post", "delete", "options", "head", "patch", "trace"};
    return methods.contains(key);
}

// Resolves body-related refs of an operation copy against the original document.
void inline_body_refs(json& op, const json& original) {
    if (auto rb = op.find("requestBody"); rb != op.end()) {
        inline_ref(*rb, original);
        if (auto content = rb->find("content"); content != rb->end() && content->is_object()) {
            for (auto& [type, media] : content->items()) {
                if (media.is_object() && media.contains("schema")) {
                    inline_ref(media["schema"], original);
                }
            }
        }
    }
    if (auto params = op.find("parameters"); params != op.end() && params->is_array()) {
        for (auto& param : *params) {
            json resolved = param;
            inline_ref(resolved, original);
            if (resolved.is_object() && resolved.value("in", "") == "body") {
                param = std::move(resolved);
                if (param.contains("schema")) {
                    inline_ref(param["schema"], original);
                }
            }
        }
    }
}

}  // namespace

std::string_view to_string(mode m) noexcept { return m == mode::doc ? "doc" : "fuzz"; }

api_document enhance_doc(const api_document& doc, const plan& p) {
    if (p.mode != mode::doc) {
        throw std::invalid_argument("enhance_doc requires a doc-mode plan");
    }
    auto sites = sites_of(doc);
    check_assignments(p, sites, doc.root);
    const auto version = detect_version(doc.root);
    api_document out = doc;
    for (const auto& [ptr, set] : p.assignments) {
        apply_doc(out.root, doc.root, version, ptr, set);
    }
    return out;
}

api_document enhance_fuzz(const api_document& doc, const plan& p, const fuzz_options& options) {
    if (p.mode != mode::fuzz) {
        throw std::invalid_argument("enhance_fuzz requires a fuzz-mode plan");
    }
    if (options.overload_suffix.empty()) {
        throw std::invalid_argument("overload suffix must not be empty");
    }
    auto sites = sites_of(doc);
    check_assignments(p, sites, doc.root);
    const auto version = detect_version(doc.root);

    // path -> methods carrying at least one assigned parameter, and whether
    // any of those parameters lives outside the path item.
    std::map<std::string, std::set<std::string>> touched;
    std::set<std::pair<std::string, std::string>> shared_body;
    for (const auto& [ptr, set] : p.assignments) {
        for (const auto& [path, method] : sites.at(ptr).operations) {
            touched[path].insert(method);
            if (ptr.rfind(pointer::append("/paths", path) + "/", 0) != 0) {
                shared_body.emplace(path, method);
            }
        }
    }

    api_document out = doc;
    for (const auto& [ptr, set] : p.assignments) {
        apply_fuzz(out.root, doc.root, version, ptr, set);
    }
    if (touched.empty()) {
        return out;
    }

    const json& original_paths = doc.root.at("paths");
    std::set<std::string> operation_ids;
    for (const auto& [path, item] : original_paths.items()) {
        if (!item.is_object()) {
            continue;
        }
        for (const auto& [key, op] : item.items()) {
            if (is_method(key) && op.is_object() && op.contains("operationId") && op["operationId"].is_string()) {
                operation_ids.insert(op["operationId"].get<std::string>());
            }
        }
    }

    json paths = json::object();
    for (auto& [path, item] : out.root.at("paths").items()) {
        paths[path] = item;
        auto it = touched.find(path);
        if (it == touched.end()) {
            continue;
        }
        const std::string overload = path + options.overload_suffix;
        if (original_paths.contains(overload)) {
            throw path_collision(overload);
        }
        json copy = json::object();
        for (const auto& [key, value] : original_paths.at(path).items()) {
            if (!is_method(key)) {
                copy[key] = value;
                continue;
            }
            if (!it->second.contains(key)) {
                continue;
            }
            json op = value;
            if (shared_body.contains({path, key})) {
                inline_body_refs(op, doc.root);
            }
            if (auto id = op.find("operationId"); id != op.end() && id->is_string()) {
                auto renamed = id->get<std::string>() + "_orig";
                if (operation_ids.contains(renamed)) {
                    throw error("overload operationId already exists: " + renamed);
                }
                operation_ids.insert(renamed);
                *id = renamed;
            }
            copy[key] = std::move(op);
        }
        paths[overload] = std::move(copy);
    }
    out.root["paths"] = std::move(paths);
    return out;
}

}  // namespace icicl::enhance
