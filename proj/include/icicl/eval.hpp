#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icicl/embedding.hpp"
#include "icicl/postprocess.hpp"
#include "icicl/types.hpp"

namespace icicl::eval {

/// Everything generated for one parameter during a run.
struct generation_record {
    api_parameter parameter;
    std::optional<example_value> greedy;
    /// One slot per diverse context; nullopt for failed or empty generations.
    std::vector<std::optional<example_value>> diverse_raw;
    std::optional<postprocess::example_set> final;

    friend bool operator==(const generation_record&, const generation_record&) = default;
};

/// Greedy is present and it and every present diverse generation pass type_check.
bool metric_type_correct(const generation_record& record);

/// At least three case-insensitively distinct values among the diverse generations.
bool metric_unique(const generation_record& record);

/// 1 - mean pairwise cosine of the final examples, clipped to [0, 1].
/// nullopt for fewer than two examples.
std::optional<double> metric_diversity(const postprocess::example_set& set, embedding::provider& embedder);

struct parameter_metrics {
    std::string api_name;
    std::string source_pointer;
    std::string param_name;
    bool type_correct = false;
    bool unique = false;
    bool both = false;
    std::optional<double> diversity;
    std::optional<bool> correct_label;

    friend bool operator==(const parameter_metrics&, const parameter_metrics&) = default;
};

/// Percentages are on a 0-100 scale.
struct aggregates {
    double type_pct = 0.0;
    double unique_pct = 0.0;
    double both_pct = 0.0;
    std::optional<double> mean_diversity;
    std::optional<double> correct_pct;

    friend bool operator==(const aggregates&, const aggregates&) = default;
};

struct intrinsic_report {
    std::string embedder_id;
    std::vector<parameter_metrics> per_parameter;
    eval::aggregates aggregates;

    friend bool operator==(const intrinsic_report&, const intrinsic_report&) = default;
};

eval::aggregates aggregate(std::span<const parameter_metrics> rows);

intrinsic_report evaluate(std::span<const generation_record> records, embedding::provider& embedder);

/// CSV rows of (api_name, source_pointer, correct in {0,1}); an optional header
/// row is skipped. Later rows for the same site win. Throws malformed_labels.
intrinsic_report ingest_labels(intrinsic_report report, std::string_view csv_text);
intrinsic_report ingest_labels_file(intrinsic_report report, const std::filesystem::path& path);

json to_json(const intrinsic_report& report);
std::string to_csv(const intrinsic_report& report);

/// Header and value line in the Type / Unique / Both / Div [/ Correct] layout.
std::string table_row(const intrinsic_report& report);

json to_json(const generation_record& record);
generation_record record_from_json(const json& j);

/// One compact JSON record per line.
std::string save_records(std::span<const generation_record> records);
/// Throws icicl::error naming the offending line.
std::vector<generation_record> load_records(std::string_view text);

}  // namespace icicl::eval
