#include "icicl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "icicl/bank.hpp"
#include "icicl/error.hpp"
#include "icicl/eval.hpp"
#include "icicl/extract.hpp"
#include "icicl/log.hpp"
#include "icicl/pipeline.hpp"

namespace icicl::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error("cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::filesystem::path with_suffix(const std::filesystem::path& base, std::string_view suffix) {
    auto p = base;
    p += std::string(suffix);
    return p;
}

struct mine_args {
    std::string corpus;
    std::string out;
    std::string include = "*";
};

int cmd_mine(const mine_args& a, std::ostream& out) {
    auto report = mine_corpus(a.corpus, a.include);
    if (report.bank.entries.empty()) {
        log::warn("no parameter in the corpus carries examples; the bank is empty");
    }
    pipeline::write_file_atomic(a.out, save_bank(report.bank));
    out << "specs: " << report.spec_files << " parsed, " << report.skipped_files << " skipped\n";
    out << "parameters: " << report.parameter_count << ", with examples: " << report.bank.entries.size() << "\n";
    out << "digest: " << report.bank.source_digest << "\n";
    return kOk;
}

struct enrich_args {
    std::string spec;
    std::string out;
    std::string config_file;
    std::string records;
    std::string manifest;
    bool timing = false;
    // Raw flag values; applied only when given.
    std::string bank, backend, replay_file, record_file, mode, overload_suffix, embedder, embed_fixture;
    std::uint64_t seed = 0;
    std::size_t parallelism = 0, shots = 0, contexts = 0;
    double temperature = 0.0, sampling_temperature = 0.0;
    bool include_trivial = false;
};

struct given {
    const CLI::App& app;
    bool operator()(const char* name) const {
        const auto* opt = app.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    }
};

pipeline::run_config resolve_config(const enrich_args& a, const given& has, std::string_view forced_mode) {
    pipeline::run_config c;
    if (!a.config_file.empty()) {
        pipeline::apply_config_file(c, a.config_file);
    }
    pipeline::apply_environment(c);
    std::string overrides;
    auto put = [&overrides](std::string_view key, const std::string& value) {
        overrides += std::string(key) + "=" + value + "\n";
    };
    if (has("--backend")) put("backend", a.backend);
    if (has("--mode")) put("mode", a.mode);
    if (has("--embedder")) put("embedder", a.embedder);
    if (has("--include-trivial")) put("include_trivial", a.include_trivial ? "true" : "false");
    pipeline::apply_config_text(c, overrides);
    if (has("--bank")) c.bank_path = a.bank;
    if (has("--replay-file")) c.replay_file = a.replay_file;
    if (has("--record-file")) c.record_file = a.record_file;
    if (has("--embed-fixture")) c.embed_fixture = a.embed_fixture;
    if (has("--overload-suffix")) c.overload_suffix = a.overload_suffix;
    if (has("--seed")) c.seed = a.seed;
    if (has("--parallelism")) c.parallelism = a.parallelism;
    if (has("--shots")) c.shots = a.shots;
    if (has("--contexts")) c.contexts = a.contexts;
    if (has("--temperature")) c.diverse_temperature = a.temperature;
    if (has("--sampling-temperature")) c.sampling_temperature = a.sampling_temperature;
    if (!c.replay_file.empty() && !has("--backend") && c.backend == pipeline::backend_kind::http &&
        c.http.endpoint.empty()) {
        c.backend = pipeline::backend_kind::replay;
    }
    if (forced_mode == "fuzz") {
        c.mode = enhance::mode::fuzz;
    }
    c.validate();
    return c;
}

int cmd_enrich(const pipeline::run_config& c, const enrich_args& a, std::ostream& out) {
    const auto started = std::chrono::steady_clock::now();
    auto doc = load_document(a.spec);
    auto bank = load_bank_file(c.bank_path);
    auto backend = pipeline::make_backend(c);
    auto embedder = pipeline::make_embedder(c);
    std::optional<gateway::recording_backend> recorder;
    gateway::generation_backend* active = backend.get();
    if (!c.record_file.empty()) {
        recorder.emplace(*backend);
        active = &*recorder;
    }

    auto result = pipeline::enrich(doc, bank, *active, *embedder, c);

    const std::filesystem::path spec_out = a.out;
    const auto records_out = a.records.empty() ? with_suffix(spec_out, ".records.jsonl") : std::filesystem::path(a.records);
    const auto manifest_out = a.manifest.empty() ? with_suffix(spec_out, ".manifest.json") : std::filesystem::path(a.manifest);
    std::optional<double> wall;
    if (a.timing) {
        wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    pipeline::write_file_atomic(spec_out, serialize(result.output));
    pipeline::write_file_atomic(records_out, eval::save_records(result.records));
    pipeline::write_file_atomic(manifest_out, to_json_text(pipeline::manifest(c, bank, result, wall)));
    if (recorder) {
        recorder->save(c.record_file);
    }

    out << "enriched: " << result.count(pipeline::outcome_status::enriched)
        << ", skipped: " << result.count(pipeline::outcome_status::skipped)
        << ", failed: " << result.count(pipeline::outcome_status::failed) << "\n";
    if (wall) {
        out << "wall time: " << *wall << " s\n";
    }
    return result.count(pipeline::outcome_status::enriched) > 0 ? kOk : kFailure;
}

struct eval_args {
    std::string records;
    std::string labels;
    std::string out;
    bool csv = false;
    std::string embedder = "trigram";
    std::string embed_fixture;
};

int cmd_eval(const eval_args& a, std::ostream& out, std::ostream& err) {
    std::string text;
    std::vector<eval::generation_record> records;
    try {
        records = eval::load_records(read_file(a.records));
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    if (records.empty()) {
        err << "error: no records in " << a.records << "\n";
        return kFailure;
    }
    pipeline::run_config c;
    pipeline::apply_environment(c);
    pipeline::apply_config_text(c, "embedder=" + a.embedder + "\n");
    c.embed_fixture = a.embed_fixture;
    auto embedder = pipeline::make_embedder(c);
    auto report = eval::evaluate(records, *embedder);
    if (!a.labels.empty()) {
        report = eval::ingest_labels_file(std::move(report), a.labels);
    }
    const std::string body = a.csv ? eval::to_csv(report) : to_json_text(eval::to_json(report));
    if (!a.out.empty()) {
        pipeline::write_file_atomic(a.out, body);
    } else if (a.csv) {
        out << body;
    }
    out << eval::table_row(report);
    return kOk;
}

void add_enrich_options(CLI::App& cmd, enrich_args& a, bool with_mode) {
    cmd.add_option("spec", a.spec, "Input OpenAPI document")->required()->check(CLI::ExistingFile);
    cmd.add_option("-o,--out", a.out, "Enhanced document")->required();
    cmd.add_option("--config", a.config_file, "key = value configuration file")->check(CLI::ExistingFile);
    cmd.add_option("--bank", a.bank, "Parameter bank file");
    cmd.add_option("--backend", a.backend, "http or replay")->check(CLI::IsMember({"http", "replay"}));
    cmd.add_option("--replay-file", a.replay_file, "Replay fixture for the replay backend");
    cmd.add_option("--record-file", a.record_file, "Write every backend response to this replay fixture");
    cmd.add_option("--seed", a.seed, "Sampling seed");
    if (with_mode) {
        cmd.add_option("--mode", a.mode, "doc or fuzz")->check(CLI::IsMember({"doc", "fuzz"}));
    }
    cmd.add_option("--parallelism", a.parallelism, "Concurrent backend calls");
    cmd.add_option("--shots", a.shots, "Bank shots per context");
    cmd.add_option("--contexts", a.contexts, "Diverse contexts per parameter");
    cmd.add_option("--temperature", a.temperature, "Diverse-phase temperature");
    cmd.add_option("--sampling-temperature", a.sampling_temperature, "Softmax temperature for shot sampling");
    cmd.add_flag("--include-trivial", a.include_trivial, "Copy enum and boolean values as examples");
    cmd.add_option("--overload-suffix", a.overload_suffix, "Path suffix for the original operation copy");
    cmd.add_option("--embedder", a.embedder, "trigram, remote or fixture")
        ->check(CLI::IsMember({"trigram", "remote", "fixture"}));
    cmd.add_option("--embed-fixture", a.embed_fixture, "Embedding fixture file");
    cmd.add_option("--records", a.records, "Generation records log (default <out>.records.jsonl)");
    cmd.add_option("--manifest", a.manifest, "Run manifest (default <out>.manifest.json)");
    cmd.add_flag("--timing", a.timing, "Record wall time in the manifest");
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Enrich OpenAPI documents with generated parameter examples", "icicl"};
    app.require_subcommand(1);

    mine_args mine;
    auto* mine_cmd = app.add_subcommand("mine", "Mine a parameter bank from a corpus of specifications");
    mine_cmd->add_option("corpus", mine.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    mine_cmd->add_option("-o,--out", mine.out, "Bank file to write")->required();
    mine_cmd->add_option("--include", mine.include, "Glob applied to file names or relative paths");

    enrich_args enrich;
    auto* enrich_cmd = app.add_subcommand("enrich", "Add generated examples to a specification");
    add_enrich_options(*enrich_cmd, enrich, true);

    enrich_args fuzz;
    auto* fuzz_cmd = app.add_subcommand("fuzz-prep", "enrich --mode fuzz");
    add_enrich_options(*fuzz_cmd, fuzz, false);

    eval_args ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score a generation records log");
    eval_cmd->add_option("records", ev.records, "Records log from enrich")->required();
    eval_cmd->add_option("--labels", ev.labels, "CSV of api_name,source_pointer,correct")->check(CLI::ExistingFile);
    eval_cmd->add_option("-o,--out", ev.out, "Report file");
    eval_cmd->add_flag("--csv", ev.csv, "Write a flat CSV table instead of JSON");
    eval_cmd->add_option("--embedder", ev.embedder, "trigram, remote or fixture")
        ->check(CLI::IsMember({"trigram", "remote", "fixture"}));
    eval_cmd->add_option("--embed-fixture", ev.embed_fixture, "Embedding fixture file");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        if (app.get_subcommands().empty()) {
            err << app.help();
        }
        return kUsage;
    }

    try {
        if (mine_cmd->parsed()) {
            return cmd_mine(mine, out);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(ev, out, err);
        }
        const bool is_fuzz = fuzz_cmd->parsed();
        auto& a = is_fuzz ? fuzz : enrich;
        auto& cmd = is_fuzz ? *fuzz_cmd : *enrich_cmd;
        pipeline::run_config config;
        try {
            config = resolve_config(a, given{cmd}, is_fuzz ? "fuzz" : "");
        } catch (const config_error& e) {
            err << "usage error: " << e.what() << "\n";
            return kUsage;
        }
        return cmd_enrich(config, a, out);
    } catch (const config_error& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace icicl::cli
