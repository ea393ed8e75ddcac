#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "icicl/embedding.hpp"
#include "icicl/types.hpp"

namespace icicl::postprocess {

/// Maximum number of examples written back for a parameter.
inline constexpr std::size_t kMaxExamples = 3;

/// Whether a value is acceptable for a declared type. Unknown accepts anything.
bool type_check(const example_value& value, const schema_type& type);

/// RFC 3339 full-date or date-time.
bool is_rfc3339(std::string_view s);

struct candidate_pool {
    std::optional<example_value> greedy;
    std::vector<example_value> diverse;
    schema_type target_type;
};

enum class origin { greedy, repeated, embedding_selected, schema_declared };

std::string_view to_string(origin p) noexcept;
std::optional<origin> parse_origin(std::string_view name) noexcept;

struct example_set {
    std::vector<example_value> examples;
    std::vector<origin> provenance;
    bool greedy_included = false;

    friend bool operator==(const example_set&, const example_set&) = default;
};

/// Greedy first, then repeated values by multiplicity, then the values most
/// similar to the greedy one, up to kMaxExamples. Throws greedy_missing.
example_set select_examples(const candidate_pool& pool, embedding::provider& embedder);

json to_json(const example_set& set);
example_set example_set_from_json(const json& j);

}  // namespace icicl::postprocess
