#pragma once

#include <map>
#include <string>
#include <string_view>

#include "icicl/document.hpp"
#include "icicl/postprocess.hpp"

namespace icicl::enhance {

enum class mode { doc, fuzz };

std::string_view to_string(mode m) noexcept;

/// Example sets keyed by the source_pointer of the parameter they belong to.
struct plan {
    std::map<std::string, postprocess::example_set> assignments;
    enhance::mode mode = mode::doc;
};

/// Writes each example set as a schema examples list. OpenAPI 3.1 uses
/// `schema.examples`; 3.0 and Swagger 2.0, whose schemas have no `examples`
/// keyword, get `example` plus an `x-examples` list. Existing examples are replaced.
/// Throws pointer_miss.
api_document enhance_doc(const api_document& doc, const plan& p);

struct fuzz_options {
    std::string overload_suffix = "__icicl_orig";
};

/// Constrains each assigned parameter to its examples (`enum`, plus `example`
/// set to the first one) and keeps an untouched copy of every affected
/// operation under the suffixed path with operationId + "_orig".
/// Throws pointer_miss and path_collision.
api_document enhance_fuzz(const api_document& doc, const plan& p, const fuzz_options& options = {});

}  // namespace icicl::enhance
