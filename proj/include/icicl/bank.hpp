#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "icicl/types.hpp"

namespace icicl {

struct bank_entry {
    api_parameter parameter;
    /// The first listed example of the parameter.
    example_value canonical_example;

    friend bool operator==(const bank_entry&, const bank_entry&) = default;
};

/// Mined parameters that carry human-written examples; the retrieval corpus.
struct parameter_bank {
    std::vector<bank_entry> entries;
    std::string source_digest;

    friend bool operator==(const parameter_bank&, const parameter_bank&) = default;
};

/// Builds an entry from a parameter with at least one example.
bank_entry make_entry(api_parameter p);

/// Sorts by (api_name, source_pointer, operation_id, param_name) and drops later duplicates.
void normalize_bank(parameter_bank& bank);

struct mining_report {
    parameter_bank bank;
    std::size_t spec_files = 0;     ///< files parsed successfully
    std::size_t skipped_files = 0;  ///< candidate files that failed to parse
    std::size_t parameter_count = 0;
};

/// Walks corpus_dir recursively for .json/.yaml/.yml files whose name (or
/// relative path) matches include_filter. Unparseable files are skipped with a warning.
/// Throws empty_corpus when no file parses.
mining_report mine_corpus(const std::filesystem::path& corpus_dir, std::string_view include_filter = "*");

parameter_bank mine_bank(const std::filesystem::path& corpus_dir, std::string_view include_filter = "*");

/// Line-delimited JSON: a `{"source_digest": ...}` header, then one entry per line.
std::string save_bank(const parameter_bank& bank);

/// Throws corrupt_bank naming the first offending line.
parameter_bank load_bank(std::string_view bytes);

parameter_bank load_bank_file(const std::filesystem::path& path);

}  // namespace icicl
