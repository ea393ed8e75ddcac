#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "icicl/backend.hpp"
#include "icicl/context.hpp"

namespace icicl::gateway {

struct gateway_options {
    std::size_t parallelism = 4;
    retry_policy retry;
    std::size_t max_new_tokens = 64;
    double diverse_temperature = 0.5;
    std::vector<std::string> stop_sequences{"\n"};
};

/// One temperature-0 call on the rendered greedy context.
raw_generation generate_greedy(generation_backend& backend, const context::prompt_context& ctx,
                               const gateway_options& options = {});

/// One call per context, results in context order. Identical prompts are
/// issued sequentially in context order so scripted backends stay deterministic.
/// A failed call yields an empty generation; throws all_calls_failed if every call fails.
std::vector<raw_generation> generate_diverse(generation_backend& backend, const context::context_set& set,
                                             const gateway_options& options = {});

/// First line, trimmed. For string-like declared types one layer of matching
/// quotes is removed. nullopt when nothing is left.
std::optional<example_value> parse_generation(std::string_view text, const schema_type& declared_type);

}  // namespace icicl::gateway
