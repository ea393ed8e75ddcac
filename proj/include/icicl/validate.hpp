#pragma once

#include <string>
#include <vector>

#include "icicl/document.hpp"

namespace icicl::validate {

struct issue {
    std::string pointer;
    std::string message;
};

/// Structural checks for OpenAPI 3.0/3.1 and Swagger 2.0 documents: required
/// objects, parameter shape and locations, path template bindings, unique
/// operation ids, schema keywords allowed by the version, enum shape, and
/// in-document references.
std::vector<issue> check(const json& root);

}  // namespace icicl::validate
