#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "icicl/backend.hpp"
#include "icicl/bank.hpp"
#include "icicl/embedding.hpp"
#include "icicl/enhance.hpp"
#include "icicl/eval.hpp"

namespace icicl::pipeline {

enum class backend_kind { http, replay };
enum class embedder_kind { trigram, remote, fixture };

std::string_view to_string(backend_kind k) noexcept;
std::string_view to_string(embedder_kind k) noexcept;

struct run_config {
    std::filesystem::path bank_path;
    backend_kind backend = backend_kind::http;
    std::filesystem::path replay_file;
    /// When set, every backend response is also written here in replay format.
    std::filesystem::path record_file;
    gateway::http_settings http;
    embedder_kind embedder = embedder_kind::trigram;
    std::filesystem::path embed_fixture;
    std::string embed_endpoint;
    std::uint64_t seed = 0;
    std::size_t shots = 5;
    std::size_t contexts = 10;
    double diverse_temperature = 0.5;
    double sampling_temperature = 0.05;
    std::size_t parallelism = 4;
    enhance::mode mode = enhance::mode::doc;
    std::string overload_suffix = "__icicl_orig";
    bool include_trivial = false;

    /// Throws config_error.
    void validate() const;
    /// Settings that determine a run's outputs. Credentials are left out.
    json snapshot() const;
};

/// Applies `key = value` lines (`#` comments) on top of `config`. Throws config_error.
void apply_config_text(run_config& config, std::string_view text);
void apply_config_file(run_config& config, const std::filesystem::path& path);
/// ICICL_LLM_ENDPOINT, ICICL_LLM_API_KEY, ICICL_LLM_TIMEOUT_MS, ICICL_EMBED_ENDPOINT.
void apply_environment(run_config& config);

enum class outcome_status { enriched, skipped, failed };

std::string_view to_string(outcome_status s) noexcept;

struct parameter_outcome {
    std::string api_name;
    std::string source_pointer;
    std::string operation_id;
    std::string param_name;
    outcome_status status = outcome_status::skipped;
    std::string reason;
};

struct run_result {
    api_document output;
    std::vector<eval::generation_record> records;
    /// One entry per extracted parameter, in extraction order.
    std::vector<parameter_outcome> outcomes;

    std::size_t count(outcome_status s) const;
};

/// Mixes the run seed with a parameter's identity.
std::uint64_t parameter_seed(std::uint64_t seed, const api_parameter& p);

/// Retrieval, contexts, generation and postprocessing for every extracted
/// parameter, then the enhanced document. Parameters that already carry
/// examples are skipped, as are boolean and enum ones unless include_trivial.
run_result enrich(const api_document& doc, const parameter_bank& bank, gateway::generation_backend& backend,
                  embedding::provider& embedder, const run_config& config);

json manifest(const run_config& config, const parameter_bank& bank, const run_result& result,
              std::optional<double> wall_seconds = std::nullopt);

std::unique_ptr<gateway::generation_backend> make_backend(const run_config& config);
std::unique_ptr<embedding::provider> make_embedder(const run_config& config);

/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace icicl::pipeline
