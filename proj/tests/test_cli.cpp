#include <doctest.h>

#include <cstdlib>
#include <set>

#include "icicl/cli.hpp"
#include "icicl/error.hpp"
#include "support/helpers.hpp"
#include "support/planted.hpp"

using namespace icicl;
using namespace icicl::testing;

namespace {

struct cli_result {
    int code;
    std::string out;
    std::string err;
};

cli_result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

/// Clears the environment variables the tool reads, restoring them afterwards.
class clean_env {
  public:
    clean_env() {
        for (const char* name : kNames) {
            if (const char* v = std::getenv(name)) {
                saved_.emplace_back(name, v);
            }
            ::unsetenv(name);
        }
    }
    ~clean_env() {
        for (const char* name : kNames) {
            ::unsetenv(name);
        }
        for (const auto& [k, v] : saved_) {
            ::setenv(k.c_str(), v.c_str(), 1);
        }
    }

  private:
    static constexpr const char* kNames[] = {"ICICL_LLM_ENDPOINT", "ICICL_LLM_API_KEY", "ICICL_LLM_TIMEOUT_MS",
                                             "ICICL_EMBED_ENDPOINT"};
    std::vector<std::pair<std::string, std::string>> saved_;
};

std::string mined_bank(const scratch_dir& dir) {
    auto path = (dir / "bank.jsonl").string();
    auto r = run_cli({"mine", (data_dir() / "corpus").string(), "-o", path});
    REQUIRE(r.code == 0);
    return path;
}

std::vector<std::string> running_enrich_args(const std::string& bank, const std::string& out) {
    return {"enrich",
            (data_dir() / "running" / "rest-countries.yaml").string(),
            "-o", out,
            "--bank", bank,
            "--replay-file", (data_dir() / "running" / "replay.json").string(),
            "--seed", std::to_string(kRunningSeed),
            "--embedder", "fixture",
            "--embed-fixture", (data_dir() / "running" / "embeddings.json").string(),
            "--mode", "fuzz"};
}

pipeline::run_config replay_config(const std::string& replay = "unused.json") {
    pipeline::run_config c;
    c.bank_path = "bank.jsonl";
    c.backend = pipeline::backend_kind::replay;
    c.replay_file = replay;
    return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("mine prints a summary and writes the bank") {
    clean_env env;
    scratch_dir dir;
    auto r = run_cli({"mine", (data_dir() / "corpus").string(), "-o", (dir / "bank.jsonl").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("specs: 10 parsed, 0 skipped\n") != std::string::npos);
    CHECK(r.out.find("parameters: 40, with examples: 6\n") != std::string::npos);
    auto bank = load_bank_file(dir / "bank.jsonl");
    CHECK(bank == fixture_bank());
    CHECK(r.out.find("digest: " + bank.source_digest) != std::string::npos);

    auto filtered = run_cli({"mine", (data_dir() / "corpus").string(), "-o", (dir / "y.jsonl").string(),
                             "--include", "*.yaml"});
    CHECK(filtered.code == 0);
    CHECK(filtered.out.find("specs: 6 parsed") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
    clean_env env;
    scratch_dir dir;
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"mine", (dir / "nope").string(), "-o", (dir / "b").string()}).code == 2);
    CHECK(run_cli({"mine", (data_dir() / "corpus").string()}).code == 2);
    auto spec = (data_dir() / "running" / "rest-countries.yaml").string();
    CHECK(run_cli({"enrich", spec, "-o", (dir / "o.yaml").string(), "--mode", "sideways"}).code == 2);
    // No bank configured.
    auto nobank = run_cli({"enrich", spec, "-o", (dir / "o.yaml").string(), "--replay-file", "x.json"});
    CHECK(nobank.code == 2);
    CHECK(nobank.err.find("bank") != std::string::npos);
    // The http backend without an endpoint.
    auto noendpoint = run_cli({"enrich", spec, "-o", (dir / "o.yaml").string(), "--bank", "b.jsonl"});
    CHECK(noendpoint.code == 2);
    CHECK(run_cli({"enrich", spec, "-o", (dir / "o.yaml").string(), "--bank", "b", "--replay-file", "r",
                   "--temperature", "3"})
              .code == 2);
    CHECK(run_cli({"fuzz-prep", spec, "-o", (dir / "o.yaml").string(), "--mode", "doc"}).code == 2);
    CHECK(run_cli({"eval"}).code == 2);
    auto help = run_cli({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("mine") != std::string::npos);
}

TEST_CASE("run-level failures exit with 1") {
    clean_env env;
    scratch_dir dir;
    auto bank = mined_bank(dir);
    write_file(dir / "broken.yaml", "openapi: [unclosed\n");
    auto r = run_cli({"enrich", (dir / "broken.yaml").string(), "-o", (dir / "o.yaml").string(), "--bank", bank,
                      "--replay-file", (data_dir() / "running" / "replay.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("line") != std::string::npos);

    write_file(dir / "corrupt.jsonl", "not a bank\n");
    auto c = run_cli({"enrich", (data_dir() / "running" / "rest-countries.yaml").string(), "-o",
                      (dir / "o.yaml").string(), "--bank", (dir / "corrupt.jsonl").string(), "--replay-file",
                      (data_dir() / "running" / "replay.json").string()});
    CHECK(c.code == 1);
}

TEST_CASE("enrich on a boolean-only spec enriches nothing and exits 1") {
    clean_env env;
    scratch_dir dir;
    auto bank = mined_bank(dir);
    auto out = (dir / "flags.yaml").string();
    auto r = run_cli({"enrich", (data_dir() / "specs" / "flags.yaml").string(), "-o", out, "--bank", bank,
                      "--replay-file", (data_dir() / "running" / "replay.json").string()});
    CHECK(r.code == 1);
    CHECK(r.out.find("enriched: 0, skipped: 2, failed: 0") != std::string::npos);
    CHECK(load_document(out).root == load_document(data_dir() / "specs" / "flags.yaml").root);

    auto trivial = run_cli({"enrich", (data_dir() / "specs" / "flags.yaml").string(), "-o", out, "--bank", bank,
                            "--replay-file", (data_dir() / "running" / "replay.json").string(),
                            "--include-trivial"});
    CHECK(trivial.code == 0);
    CHECK(trivial.out.find("enriched: 2, skipped: 0, failed: 0") != std::string::npos);
    auto doc = load_document(out);
    CHECK(doc.root["paths"]["/flags"]["get"]["parameters"][0]["schema"]["x-examples"] == json::array({true, false}));
}

TEST_CASE("running example through the command line") {
    clean_env env;
    scratch_dir dir;
    auto bank = mined_bank(dir);
    auto out = (dir / "out.yaml").string();
    auto r = run_cli(running_enrich_args(bank, out));
    INFO(r.err);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("enriched: 1, skipped: 0, failed: 0") != std::string::npos);
    auto doc = load_document(out);
    const auto& param = doc.root["paths"]["/v2/currency/{currency}"]["get"]["parameters"][0];
    CHECK(param["schema"]["enum"] == json::array({"USD", "CAD", "EUR"}));
    CHECK(param["example"] == "USD");
    CHECK(doc.root["paths"].contains("/v2/currency/{currency}__icicl_orig"));

    auto records = eval::load_records(read_file(out + ".records.jsonl"));
    REQUIRE(records.size() == 1);
    CHECK(records[0].greedy->raw_text() == "USD");
    CHECK(records[0].diverse_raw.size() == 10);
    auto manifest = json::parse(read_file(out + ".manifest.json"));
    CHECK(manifest["config"]["seed"] == kRunningSeed);
    CHECK(manifest["config"]["backend"] == "replay");
    CHECK(manifest["counts"]["enriched"] == 1);
    CHECK_FALSE(manifest.contains("wall_seconds"));

    auto fuzz_args = running_enrich_args(bank, (dir / "alias.yaml").string());
    fuzz_args[0] = "fuzz-prep";
    fuzz_args.erase(fuzz_args.end() - 2, fuzz_args.end());
    auto alias = run_cli(fuzz_args);
    CHECK(alias.code == 0);
    CHECK(read_file(dir / "alias.yaml") == read_file(out));
}

TEST_CASE("repeated runs are byte-identical") {
    clean_env env;
    scratch_dir dir;
    auto bank = mined_bank(dir);
    auto a = (dir / "a.yaml").string();
    auto b = (dir / "b.yaml").string();
    auto args_a = running_enrich_args(bank, a);
    auto args_b = running_enrich_args(bank, b);
    args_b.insert(args_b.end(), {"--parallelism", "1", "--manifest", (dir / "a.yaml.manifest.b").string()});
    REQUIRE(run_cli(args_a).code == 0);
    REQUIRE(run_cli(args_b).code == 0);
    CHECK(read_file(a) == read_file(b));
    CHECK(read_file(a + ".records.jsonl") == read_file(b + ".records.jsonl"));
    auto ma = json::parse(read_file(a + ".manifest.json"));
    auto mb = json::parse(read_file(dir / "a.yaml.manifest.b"));
    CHECK(mb["config"]["parallelism"] == 1);
    mb["config"]["parallelism"] = ma["config"]["parallelism"];
    CHECK(ma == mb);
}

TEST_CASE("recording a run and replaying the recording") {
    clean_env env;
    scratch_dir dir;
    auto bank = mined_bank(dir);
    auto args = running_enrich_args(bank, (dir / "first.yaml").string());
    args.insert(args.end(), {"--record-file", (dir / "rec.json").string()});
    REQUIRE(run_cli(args).code == 0);
    auto replayed = running_enrich_args(bank, (dir / "second.yaml").string());
    REQUIRE(replayed[6] == "--replay-file");
    replayed[7] = (dir / "rec.json").string();
    REQUIRE(run_cli(replayed).code == 0);
    CHECK(read_file(dir / "first.yaml") == read_file(dir / "second.yaml"));
}

TEST_CASE("configuration precedence: file, then environment, then flags") {
    clean_env env;
    scratch_dir dir;
    auto bank = mined_bank(dir);
    write_file(dir / "run.conf",
               "# run settings\n"
               "seed = 1\n"
               "shots = 4\n"
               "overload_suffix = \"_from_file\"\n"
               "embedder = fixture\n"
               "embed_fixture = " + (data_dir() / "running" / "embeddings.json").string() + "\n");
    auto out = (dir / "o.yaml").string();
    auto r = run_cli({"fuzz-prep", (data_dir() / "running" / "rest-countries.yaml").string(), "-o", out, "--bank",
                      bank, "--replay-file", (data_dir() / "running" / "replay.json").string(), "--config",
                      (dir / "run.conf").string(), "--seed", "9"});
    INFO(r.err);
    CHECK(r.code != 2);
    auto manifest = json::parse(read_file(out + ".manifest.json"));
    CHECK(manifest["config"]["seed"] == 9);
    CHECK(manifest["config"]["shots"] == 4);
    CHECK(manifest["config"]["overload_suffix"] == "_from_file");
    CHECK(manifest["config"]["embedder"] == "fixture");

    pipeline::run_config c;
    pipeline::apply_config_text(c, "llm_endpoint = http://from-file/v1\nllm_timeout_ms = 100\n");
    CHECK(c.http.endpoint == "http://from-file/v1");
    ::setenv("ICICL_LLM_ENDPOINT", "http://from-env/v1", 1);
    ::setenv("ICICL_LLM_API_KEY", "k", 1);
    pipeline::apply_environment(c);
    CHECK(c.http.endpoint == "http://from-env/v1");
    CHECK(c.http.timeout == std::chrono::milliseconds(100));
    CHECK(c.http.api_key == "k");
    c.bank_path = "bank";
    CHECK(c.snapshot().dump().find("\"k\"") == std::string::npos);
    CHECK_THROWS_AS(pipeline::apply_config_text(c, "seed = many\n"), config_error);
    CHECK_THROWS_AS(pipeline::apply_config_text(c, "colour = blue\n"), config_error);
    CHECK_THROWS_AS(pipeline::apply_config_text(c, "no equals sign\n"), config_error);
    CHECK_THROWS_AS(pipeline::apply_config_text(c, "include_trivial = maybe\n"), config_error);
}

TEST_CASE("eval scores a records log") {
    clean_env env;
    scratch_dir dir;
    auto records = planted_records();
    records.resize(4);
    write_file(dir / "log.jsonl", eval::save_records(records));
    auto r = run_cli({"eval", (dir / "log.jsonl").string(), "-o", (dir / "report.json").string()});
    CHECK(r.code == 0);
    CHECK(r.out == "Type\tUnique\tBoth\tDiv\n50.0%\t75.0%\t25.0%\t-\n");
    auto report = json::parse(read_file(dir / "report.json"));
    CHECK(report["aggregates"]["count"] == 4);
    CHECK(report["aggregates"]["both_pct"] == 25.0);

    write_file(dir / "labels.csv", "api_name,source_pointer,correct\nplanted,/paths/~1clean/get/parameters/0,1\n");
    auto labeled = run_cli({"eval", (dir / "log.jsonl").string(), "--labels", (dir / "labels.csv").string(), "--csv"});
    CHECK(labeled.code == 0);
    CHECK(labeled.out.starts_with("api_name,source_pointer,param_name"));
    CHECK(labeled.out.ends_with("Type\tUnique\tBoth\tDiv\tCorrect\n50.0%\t75.0%\t25.0%\t-\t100.0%\n"));

    write_file(dir / "bad.csv", "planted,/x,2\n");
    CHECK(run_cli({"eval", (dir / "log.jsonl").string(), "--labels", (dir / "bad.csv").string()}).code == 1);
}

TEST_CASE("eval on an empty or unreadable log exits 1") {
    clean_env env;
    scratch_dir dir;
    write_file(dir / "empty.jsonl", "");
    CHECK(run_cli({"eval", (dir / "empty.jsonl").string()}).code == 1);
    CHECK(run_cli({"eval", (dir / "missing.jsonl").string()}).code == 1);
    write_file(dir / "junk.jsonl", "{}\n");
    auto r = run_cli({"eval", (dir / "junk.jsonl").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("line 1") != std::string::npos);
}

TEST_CASE("pipeline outcomes on a spec with shared definitions") {
    synthetic_backend backend;
    embedding::trigram_provider embedder;
    auto doc = load_document(data_dir() / "specs" / "shared-path.json");
    auto config = replay_config();
    config.seed = 7;
    auto result = pipeline::enrich(doc, fixture_bank(), backend, embedder, config);
    std::map<std::string, std::vector<std::string>> by_name;
    for (const auto& o : result.outcomes) {
        by_name[o.param_name].push_back(std::string(to_string(o.status)) + ":" + o.reason);
    }
    CHECK(by_name["orderId"] == std::vector<std::string>{"enriched:", "enriched:shared definition"});
    CHECK(by_name["status"] == std::vector<std::string>{"skipped:trivial type"});
    CHECK(by_name["quantity"] == std::vector<std::string>{"enriched:"});
    CHECK(by_name["placed_after"] == std::vector<std::string>{"enriched:"});
    CHECK(result.outcomes.size() == 8);
    CHECK(result.records.size() == 6);
    for (const auto& r : result.records) {
        CHECK(r.diverse_raw.size() == 10);
        REQUIRE(r.final.has_value());
        CHECK(r.final->examples.front() == *r.greedy);
        for (const auto& e : r.final->examples) {
            CHECK(postprocess::type_check(e, r.parameter.declared_type));
        }
    }
    // The shared orderId is generated once: 6 sites with 11 calls each.
    CHECK(backend.calls() == 66);

    config.include_trivial = true;
    auto with_trivial = pipeline::enrich(doc, fixture_bank(), backend, embedder, config);
    const auto* status = pointer::resolve(with_trivial.output.root, "/paths/~1orders/get/parameters/0/schema");
    REQUIRE(status != nullptr);
    CHECK((*status)["x-examples"] == json::array({"open", "closed"}));
    for (const auto& o : with_trivial.outcomes) {
        if (o.param_name == "status") {
            CHECK(o.status == pipeline::outcome_status::enriched);
        }
    }
}

TEST_CASE("pipeline output does not depend on parallelism") {
    embedding::trigram_provider embedder;
    auto doc = load_document(data_dir() / "specs" / "three-ops.yaml");
    std::string first;
    for (std::size_t p : {1, 2, 8}) {
        synthetic_backend backend;
        auto config = replay_config();
        config.parallelism = p;
        config.mode = enhance::mode::fuzz;
        auto result = pipeline::enrich(doc, fixture_bank(), backend, embedder, config);
        auto text = serialize(result.output) + eval::save_records(result.records);
        if (first.empty()) {
            first = text;
        }
        CHECK(text == first);
    }
}

TEST_CASE("pipeline failure paths") {
    embedding::trigram_provider embedder;
    auto doc = load_document(data_dir() / "running" / "rest-countries.yaml");
    auto config = replay_config();
    {
        synthetic_backend backend;
        auto r = pipeline::enrich(doc, parameter_bank{}, backend, embedder, config);
        CHECK(r.outcomes.at(0).status == pipeline::outcome_status::failed);
        CHECK(r.outcomes.at(0).reason == "empty bank");
        CHECK(r.output.root == doc.root);
    }
    {
        gateway::replay_backend silent;
        silent.set_default("   ");
        auto r = pipeline::enrich(doc, fixture_bank(), silent, embedder, config);
        CHECK(r.outcomes.at(0).reason == "no greedy example");
        REQUIRE(r.records.size() == 1);
        CHECK_FALSE(r.records[0].greedy.has_value());
        CHECK(r.records[0].diverse_raw == std::vector<std::optional<example_value>>(10));
    }
    {
        // Greedy answers, every diverse call fails.
        auto prompts = running_example_prompts();
        gateway::replay_backend only_greedy;
        only_greedy.add_response(prompts.greedy, "\"USD\"");
        auto cfg = config;
        cfg.seed = kRunningSeed;
        auto r = pipeline::enrich(doc, fixture_bank(), only_greedy, embedder, cfg);
        CHECK(r.outcomes.at(0).status == pipeline::outcome_status::failed);
        CHECK(r.outcomes.at(0).reason.find("diverse") != std::string::npos);
    }
    {
        auto with_example = doc;
        (*pointer::resolve(with_example.root, "/paths/~1v2~1currency~1{currency}/get/parameters/0"))["example"] = "USD";
        synthetic_backend backend;
        auto r = pipeline::enrich(with_example, fixture_bank(), backend, embedder, config);
        CHECK(r.outcomes.at(0).reason == "has examples");
        CHECK(backend.calls() == 0);
    }
    auto bad = config;
    bad.shots = 0;
    synthetic_backend backend;
    CHECK_THROWS_AS(pipeline::enrich(doc, fixture_bank(), backend, embedder, bad), config_error);
}

TEST_CASE("parameter seeds mix the run seed with the site") {
    auto doc = load_document(data_dir() / "specs" / "three-ops.json");
    auto params = extract_parameters(doc);
    std::set<std::uint64_t> seeds;
    for (const auto& p : params) {
        seeds.insert(pipeline::parameter_seed(1, p));
    }
    CHECK(seeds.size() == params.size());
    CHECK(pipeline::parameter_seed(1, params[0]) != pipeline::parameter_seed(2, params[0]));
    CHECK(pipeline::parameter_seed(1, params[0]) == pipeline::parameter_seed(1, params[0]));
}

TEST_CASE("atomic writes replace whole files") {
    scratch_dir dir;
    pipeline::write_file_atomic(dir / "f.txt", "one");
    pipeline::write_file_atomic(dir / "f.txt", "two");
    CHECK(read_file(dir / "f.txt") == "two");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) {
        ++entries;
    }
    CHECK(entries == 1);
}

}  // TEST_SUITE
