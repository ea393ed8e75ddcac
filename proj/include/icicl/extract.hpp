#pragma once

#include <string>
#include <vector>

#include "icicl/document.hpp"
#include "icicl/types.hpp"

namespace icicl {

enum class spec_version { swagger2, openapi30, openapi31 };

/// Throws unsupported_version when neither `openapi: 3.x` nor `swagger: 2.0` is present.
spec_version detect_version(const json& root);

/// A parameter together with the operation it was extracted for.
struct operation_parameter {
    api_parameter parameter;
    std::string path;    ///< key under /paths
    std::string method;  ///< lowercase HTTP method
};

std::vector<operation_parameter> extract_operation_parameters(const api_document& doc);

/// One entry per operation parameter and per named scalar request-body field.
std::vector<api_parameter> extract_parameters(const api_document& doc);

/// Location of a node reached by following in-document `$ref`s.
struct resolved_node {
    const json* node = nullptr;
    std::string pointer;
};

/// Follows `$ref` chains (in-file only). node is nullptr on external or dangling refs.
resolved_node resolve_refs(const json& root, const json& node, std::string pointer);

/// Declared type of a schema-like node (schema object or Swagger 2.0 parameter).
schema_type schema_type_of(const json& root, const json& schema);

}  // namespace icicl
