#include "icicl/pipeline.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "icicl/context.hpp"
#include "icicl/error.hpp"
#include "icicl/extract.hpp"
#include "icicl/gateway.hpp"
#include "icicl/log.hpp"
#include "icicl/postprocess.hpp"
#include "icicl/prompt.hpp"
#include "icicl/retrieval.hpp"
#include "icicl/text.hpp"

namespace icicl::pipeline {

namespace {

std::string env(const char* name) {
    const char* v = std::getenv(name);
    return v == nullptr ? std::string() : std::string(v);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw config_error(std::string(key) + ": not a number: '" + std::string(value) + "'");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    std::string s(value);
    char* end = nullptr;
    double out = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw config_error(std::string(key) + ": not a number: '" + s + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw config_error(std::string(key) + ": expected true or false, got '" + std::string(value) + "'");
}

bool is_trivial(const schema_type& t) {
    return t.kind() == schema_kind::boolean || t.kind() == schema_kind::enumeration;
}

postprocess::example_set declared_examples(const schema_type& t) {
    postprocess::example_set out;
    std::vector<std::string> values =
        t.kind() == schema_kind::boolean ? std::vector<std::string>{"true", "false"} : t.enum_values();
    for (const auto& v : values) {
        if (out.examples.size() >= postprocess::kMaxExamples) {
            break;
        }
        auto e = example_value::from_text(v);
        if (!e) {
            continue;
        }
        bool seen = false;
        for (const auto& prior : out.examples) {
            seen = seen || prior.folded() == e->folded();
        }
        if (!seen) {
            out.examples.push_back(*e);
            out.provenance.push_back(postprocess::origin::schema_declared);
        }
    }
    return out;
}

struct work_result {
    outcome_status status = outcome_status::failed;
    std::string reason;
    std::optional<eval::generation_record> record;
    std::optional<postprocess::example_set> examples;
};

class enricher {
public:
    enricher(const parameter_bank& bank, gateway::generation_backend& backend, embedding::provider& embedder,
             const run_config& config)
        : bank_(bank), backend_(backend), embedder_(embedder), config_(config) {
        sampling_.shots = config.shots;
        sampling_.contexts = config.contexts;
        sampling_.temperature = config.sampling_temperature;
        gateway_.parallelism = config.parallelism;
        gateway_.diverse_temperature = config.diverse_temperature;
        try {
            index_ = retrieval::index::build(bank);
        } catch (const empty_bank&) {
            index_.reset();
        }
    }

    work_result run(const api_parameter& p) const {
        work_result out;
        if (!p.existing_examples.empty()) {
            out.status = outcome_status::skipped;
            out.reason = "has examples";
            return out;
        }
        if (is_trivial(p.declared_type)) {
            out.status = outcome_status::skipped;
            out.reason = "trivial type";
            if (config_.include_trivial) {
                auto set = declared_examples(p.declared_type);
                if (!set.examples.empty()) {
                    out.status = outcome_status::enriched;
                    out.reason = "declared values";
                    out.examples = std::move(set);
                }
            }
            return out;
        }
        if (!index_) {
            out.reason = "empty bank";
            return out;
        }
        try {
            generate(p, out);
        } catch (const std::exception& e) {
            out.status = outcome_status::failed;
            out.reason = e.what();
        }
        return out;
    }

private:
    void generate(const api_parameter& p, work_result& out) const {
        const auto& type = p.declared_type;
        auto candidates = retrieval::score_all(*index_, retrieval::build_query(p));
        auto greedy_ctx = context::greedy_context(candidates, bank_, p, sampling_);
        auto greedy_raw = gateway::generate_greedy(backend_, greedy_ctx, gateway_);
        auto greedy = gateway::parse_generation(greedy_raw.text, type);

        eval::generation_record record;
        record.parameter = p;
        record.greedy = greedy;
        record.diverse_raw.assign(config_.contexts, std::nullopt);
        if (!greedy || !postprocess::type_check(*greedy, type)) {
            out.status = outcome_status::failed;
            out.reason = greedy ? "greedy example fails type check" : "no greedy example";
            out.record = std::move(record);
            return;
        }
        auto set = context::sample_contexts(candidates, bank_, p, *greedy, parameter_seed(config_.seed, p), sampling_);
        std::vector<gateway::raw_generation> raws;
        try {
            raws = gateway::generate_diverse(backend_, set, gateway_);
        } catch (const all_calls_failed& e) {
            out.status = outcome_status::failed;
            out.reason = e.what();
            out.record = std::move(record);
            return;
        }
        postprocess::candidate_pool pool{greedy, {}, type};
        for (std::size_t i = 0; i < raws.size() && i < record.diverse_raw.size(); ++i) {
            record.diverse_raw[i] = gateway::parse_generation(raws[i].text, type);
            if (record.diverse_raw[i]) {
                pool.diverse.push_back(*record.diverse_raw[i]);
            }
        }
        auto final_set = postprocess::select_examples(pool, embedder_);
        record.final = final_set;
        out.status = outcome_status::enriched;
        out.examples = std::move(final_set);
        out.record = std::move(record);
    }

    const parameter_bank& bank_;
    gateway::generation_backend& backend_;
    embedding::provider& embedder_;
    const run_config& config_;
    std::optional<retrieval::index> index_;
    context::sampling_options sampling_;
    gateway::gateway_options gateway_;
};

}  // namespace

std::string_view to_string(backend_kind k) noexcept { return k == backend_kind::http ? "http" : "replay"; }

std::string_view to_string(embedder_kind k) noexcept {
    switch (k) {
        case embedder_kind::trigram: return "trigram";
        case embedder_kind::remote: return "remote";
        case embedder_kind::fixture: return "fixture";
    }
    return "trigram";
}

std::string_view to_string(outcome_status s) noexcept {
    switch (s) {
        case outcome_status::enriched: return "enriched";
        case outcome_status::skipped: return "skipped";
        case outcome_status::failed: return "failed";
    }
    return "failed";
}

void run_config::validate() const {
    if (bank_path.empty()) {
        throw config_error("a bank file is required");
    }
    if (shots < 1) {
        throw config_error("shots must be at least 1");
    }
    if (contexts < 1) {
        throw config_error("contexts must be at least 1");
    }
    if (!(diverse_temperature >= 0.0 && diverse_temperature <= 2.0)) {
        throw config_error("temperature must be within [0, 2]");
    }
    if (!(sampling_temperature >= 0.0)) {
        throw config_error("sampling temperature must not be negative");
    }
    if (parallelism < 1) {
        throw config_error("parallelism must be at least 1");
    }
    if (overload_suffix.empty()) {
        throw config_error("overload suffix must not be empty");
    }
    if (backend == backend_kind::replay && replay_file.empty()) {
        throw config_error("the replay backend needs a replay file");
    }
    if (backend == backend_kind::http && http.endpoint.empty()) {
        throw config_error("the http backend needs an endpoint (ICICL_LLM_ENDPOINT)");
    }
    if (embedder == embedder_kind::fixture && embed_fixture.empty()) {
        throw config_error("the fixture embedder needs an embedding fixture file");
    }
    if (embedder == embedder_kind::remote && embed_endpoint.empty()) {
        throw config_error("the remote embedder needs an endpoint (ICICL_EMBED_ENDPOINT)");
    }
}

json run_config::snapshot() const {
    json j = json::object();
    j["bank"] = bank_path.generic_string();
    j["backend"] = std::string(to_string(backend));
    if (backend == backend_kind::replay) {
        j["replay_file"] = replay_file.generic_string();
    } else {
        j["endpoint"] = http.endpoint;
    }
    j["embedder"] = std::string(to_string(embedder));
    if (embedder == embedder_kind::fixture) {
        j["embed_fixture"] = embed_fixture.generic_string();
    } else if (embedder == embedder_kind::remote) {
        j["embed_endpoint"] = embed_endpoint;
    }
    j["seed"] = seed;
    j["shots"] = shots;
    j["contexts"] = contexts;
    j["diverse_temperature"] = diverse_temperature;
    j["sampling_temperature"] = sampling_temperature;
    j["parallelism"] = parallelism;
    j["mode"] = std::string(enhance::to_string(mode));
    j["overload_suffix"] = overload_suffix;
    j["include_trivial"] = include_trivial;
    return j;
}

void apply_config_text(run_config& config, std::string_view text_in) {
    std::istringstream in{std::string(text_in)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto body = text::trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
        }
        auto key = text::trim(body.substr(0, eq));
        auto value = text::trim(body.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (key == "bank") {
            config.bank_path = std::string(value);
        } else if (key == "backend") {
            if (value == "http") {
                config.backend = backend_kind::http;
            } else if (value == "replay") {
                config.backend = backend_kind::replay;
            } else {
                throw config_error("backend must be http or replay");
            }
        } else if (key == "replay_file") {
            config.replay_file = std::string(value);
        } else if (key == "record_file") {
            config.record_file = std::string(value);
        } else if (key == "llm_endpoint") {
            config.http.endpoint = std::string(value);
        } else if (key == "llm_api_key") {
            config.http.api_key = std::string(value);
        } else if (key == "llm_timeout_ms") {
            config.http.timeout = std::chrono::milliseconds(parse_number<long long>(key, value));
        } else if (key == "embedder") {
            if (value == "trigram") {
                config.embedder = embedder_kind::trigram;
            } else if (value == "remote") {
                config.embedder = embedder_kind::remote;
            } else if (value == "fixture") {
                config.embedder = embedder_kind::fixture;
            } else {
                throw config_error("embedder must be trigram, remote or fixture");
            }
        } else if (key == "embed_fixture") {
            config.embed_fixture = std::string(value);
        } else if (key == "embed_endpoint") {
            config.embed_endpoint = std::string(value);
        } else if (key == "seed") {
            config.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "shots") {
            config.shots = parse_number<std::size_t>(key, value);
        } else if (key == "contexts") {
            config.contexts = parse_number<std::size_t>(key, value);
        } else if (key == "diverse_temperature") {
            config.diverse_temperature = parse_real(key, value);
        } else if (key == "sampling_temperature") {
            config.sampling_temperature = parse_real(key, value);
        } else if (key == "parallelism") {
            config.parallelism = parse_number<std::size_t>(key, value);
        } else if (key == "mode") {
            if (value == "doc") {
                config.mode = enhance::mode::doc;
            } else if (value == "fuzz") {
                config.mode = enhance::mode::fuzz;
            } else {
                throw config_error("mode must be doc or fuzz");
            }
        } else if (key == "overload_suffix") {
            config.overload_suffix = std::string(value);
        } else if (key == "include_trivial") {
            config.include_trivial = parse_bool(key, value);
        } else {
            throw config_error("config line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
        }
    }
}

void apply_config_file(run_config& config, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw config_error("cannot read config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_text(config, buf.str());
}

void apply_environment(run_config& config) {
    auto from_env = gateway::http_settings::from_env();
    if (!from_env.endpoint.empty()) {
        config.http.endpoint = from_env.endpoint;
    }
    if (!from_env.api_key.empty()) {
        config.http.api_key = from_env.api_key;
    }
    if (!env("ICICL_LLM_TIMEOUT_MS").empty()) {
        config.http.timeout = from_env.timeout;
    }
    if (auto e = env("ICICL_EMBED_ENDPOINT"); !e.empty()) {
        config.embed_endpoint = e;
    }
}

std::size_t run_result::count(outcome_status s) const {
    std::size_t n = 0;
    for (const auto& o : outcomes) {
        n += o.status == s;
    }
    return n;
}

std::uint64_t parameter_seed(std::uint64_t seed, const api_parameter& p) {
    std::string key = std::to_string(seed);
    for (const auto* part : {&p.api_name, &p.source_pointer, &p.operation_id}) {
        key += '\0';
        key += *part;
    }
    auto hex = text::sha256_hex(key);
    return std::stoull(hex.substr(0, 16), nullptr, 16);
}

run_result enrich(const api_document& doc, const parameter_bank& bank, gateway::generation_backend& backend,
                  embedding::provider& embedder, const run_config& config) {
    config.validate();
    auto extracted = extract_operation_parameters(doc);

    // One unit of work per distinct site; sites whose prompts would be
    // identical share a group so a scripted backend sees them in order.
    std::vector<std::size_t> representative(extracted.size());
    std::vector<std::size_t> sites;
    std::map<std::string, std::size_t> by_pointer;
    for (std::size_t i = 0; i < extracted.size(); ++i) {
        auto [it, inserted] = by_pointer.emplace(extracted[i].parameter.source_pointer, i);
        representative[i] = it->second;
        if (inserted) {
            sites.push_back(i);
        }
    }
    std::vector<std::vector<std::size_t>> groups;
    std::map<std::string, std::size_t> by_prompt;
    for (auto i : sites) {
        context::prompt_context target_only;
        target_only.target = extracted[i].parameter;
        auto [it, inserted] = by_prompt.emplace(prompt::render(target_only), groups.size());
        if (inserted) {
            groups.emplace_back();
        }
        groups[it->second].push_back(i);
    }

    gateway::bounded_backend bounded(backend, config.parallelism);
    enricher worker(bank, bounded, embedder, config);
    std::vector<work_result> results(extracted.size());
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t g = next++; g < groups.size(); g = next++) {
            for (auto i : groups[g]) {
                results[i] = worker.run(extracted[i].parameter);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const auto workers = std::min(config.parallelism, groups.size());
        for (std::size_t w = 1; w < workers; ++w) {
            pool.emplace_back(drain);
        }
        drain();
    }

    run_result out;
    enhance::plan plan;
    plan.mode = config.mode;
    for (auto i : sites) {
        auto& r = results[i];
        if (r.record) {
            out.records.push_back(std::move(*r.record));
        }
        if (r.status == outcome_status::enriched && r.examples) {
            plan.assignments.emplace(extracted[i].parameter.source_pointer, *r.examples);
        }
    }
    for (std::size_t i = 0; i < extracted.size(); ++i) {
        const auto& p = extracted[i].parameter;
        const auto& r = results[representative[i]];
        parameter_outcome o{p.api_name, p.source_pointer, p.operation_id, p.param_name, r.status, r.reason};
        if (representative[i] != i) {
            o.reason = o.reason.empty() ? "shared definition" : o.reason + " (shared definition)";
        }
        switch (r.status) {
            case outcome_status::enriched: log::info("enriched " + p.operation_id + " " + p.param_name); break;
            case outcome_status::skipped: log::info("skipped " + p.operation_id + " " + p.param_name + ": " + o.reason); break;
            case outcome_status::failed: log::warn("failed " + p.operation_id + " " + p.param_name + ": " + o.reason); break;
        }
        out.outcomes.push_back(std::move(o));
    }
    out.output = config.mode == enhance::mode::doc
                     ? enhance::enhance_doc(doc, plan)
                     : enhance::enhance_fuzz(doc, plan, enhance::fuzz_options{config.overload_suffix});
    return out;
}

json manifest(const run_config& config, const parameter_bank& bank, const run_result& result,
              std::optional<double> wall_seconds) {
    json params = json::array();
    for (const auto& o : result.outcomes) {
        json entry{{"api_name", o.api_name},
                   {"source_pointer", o.source_pointer},
                   {"operation_id", o.operation_id},
                   {"param_name", o.param_name},
                   {"status", std::string(to_string(o.status))}};
        if (!o.reason.empty()) {
            entry["reason"] = o.reason;
        }
        params.push_back(std::move(entry));
    }
    json j{{"config", config.snapshot()},
           {"bank_digest", bank.source_digest},
           {"bank_entries", bank.entries.size()},
           {"counts",
            {{"extracted", result.outcomes.size()},
             {"enriched", result.count(outcome_status::enriched)},
             {"skipped", result.count(outcome_status::skipped)},
             {"failed", result.count(outcome_status::failed)}}},
           {"parameters", std::move(params)}};
    if (wall_seconds) {
        j["wall_seconds"] = *wall_seconds;
    }
    return j;
}

std::unique_ptr<gateway::generation_backend> make_backend(const run_config& config) {
    if (config.backend == backend_kind::replay) {
        return gateway::replay_backend::load(config.replay_file);
    }
    return std::make_unique<gateway::http_backend>(config.http);
}

std::unique_ptr<embedding::provider> make_embedder(const run_config& config) {
    switch (config.embedder) {
        case embedder_kind::fixture: return embedding::fixture_provider::load(config.embed_fixture);
        case embedder_kind::remote: return std::make_unique<embedding::remote_provider>(config.embed_endpoint);
        case embedder_kind::trigram: break;
    }
    return std::make_unique<embedding::trigram_provider>();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw error("cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw error("cannot write " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

}  // namespace icicl::pipeline
