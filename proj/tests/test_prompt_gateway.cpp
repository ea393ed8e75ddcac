#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <doctest.h>

#include <set>
#include <thread>

#include "icicl/embedding.hpp"
#include "icicl/error.hpp"
#include "support/helpers.hpp"

using namespace icicl;
using namespace icicl::testing;
namespace gw = icicl::gateway;

namespace {

api_parameter named(std::string name, schema_kind kind, std::string desc = "A thing") {
    api_parameter p;
    p.api_name = "toy";
    p.operation_id = "getThing";
    p.param_name = std::move(name);
    p.description = std::move(desc);
    p.declared_type = schema_type::of(kind);
    p.source_pointer = "/paths/~1t/get/parameters/0";
    return p;
}

/// Fails with a transport error the first `failures` times, then answers.
class flaky_backend : public gw::generation_backend {
  public:
    explicit flaky_backend(int failures) : failures_(failures) {}
    std::string id() const override { return "flaky"; }
    gw::backend_capabilities capabilities() const override { return {true, true}; }
    gw::raw_generation generate(const gw::generation_request&) override {
        if (calls_++ < failures_) {
            throw backend_unavailable("connection refused");
        }
        return {"ok", id(), 0};
    }
    int calls() const { return calls_; }

  private:
    int failures_;
    int calls_ = 0;
};

class rejecting_backend : public gw::generation_backend {
  public:
    std::string id() const override { return "rejecting"; }
    gw::backend_capabilities capabilities() const override { return {true, true}; }
    gw::raw_generation generate(const gw::generation_request&) override {
        ++calls;
        throw backend_rejected(400, "bad request");
    }
    int calls = 0;
};

/// Answers with the number embedded as the last bank example, failing on a chosen prompt.
class echo_backend : public gw::generation_backend {
  public:
    explicit echo_backend(std::set<std::string> fail_on = {}) : fail_on_(std::move(fail_on)) {}
    std::string id() const override { return "echo"; }
    gw::backend_capabilities capabilities() const override { return {true, true}; }
    gw::raw_generation generate(const gw::generation_request& r) override {
        if (fail_on_.contains(r.prompt)) {
            throw backend_rejected(500, "boom");
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        return {text::sha256_hex(r.prompt).substr(0, 8), id(), 0};
    }

  private:
    std::set<std::string> fail_on_;
};

context::context_set toy_set(std::size_t n) {
    context::context_set set;
    set.seed = 5;
    auto target = named("currency", schema_kind::string);
    for (std::size_t i = 0; i < n; ++i) {
        context::prompt_context c;
        c.target = target;
        auto shot_param = named("p" + std::to_string(i), schema_kind::string);
        c.shots.push_back({shot_param, *example_value::from_text("v" + std::to_string(i)),
                           context::shot_origin::bank, i});
        set.contexts.push_back(c);
    }
    return set;
}

/// Local HTTP server on an ephemeral port, stopped on destruction.
class local_server {
  public:
    local_server() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~local_server() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST_SUITE("prompt_gateway") {

TEST_CASE("render lays out shots then the dangling target") {
    context::prompt_context c;
    c.target = named("currency", schema_kind::string, "Search by \"ISO\" code");
    c.shots.push_back({named("limit", schema_kind::integer, ""), *example_value::from_text("10"),
                       context::shot_origin::bank, 0});
    const std::string expected =
        "# Given an OpenAPI parameter, generate a unique example of the parameter.\n"
        "input_0 = {\n"
        "    \"param_name\": \"limit\",\n"
        "    \"type\": \"integer\",\n"
        "    \"operation_id\": \"getThing\",\n"
        "    \"description\": \"\",\n"
        "    \"api_name\": \"toy\"\n"
        "}\n"
        "# must generate a unique limit integer\n"
        "example_0 = 10\n"
        "input_1 = {\n"
        "    \"param_name\": \"currency\",\n"
        "    \"type\": \"string\",\n"
        "    \"operation_id\": \"getThing\",\n"
        "    \"description\": \"Search by \\\"ISO\\\" code\",\n"
        "    \"api_name\": \"toy\"\n"
        "}\n"
        "# must generate a unique currency string\n"
        "example_1 = ";
    CHECK(prompt::render(c) == expected);
}

TEST_CASE("render with no shots and string examples") {
    context::prompt_context c;
    c.target = named("q", schema_kind::datetime);
    auto bare = prompt::render(c);
    CHECK(bare.starts_with(std::string(prompt::kHeader) + "\ninput_0 = {\n"));
    CHECK(bare.ends_with("# must generate a unique q datetime\nexample_0 = "));

    c.shots.push_back({named("s", schema_kind::string), *example_value::from_text("EUR"),
                       context::shot_origin::bank, 0});
    c.shots.push_back({named("n", schema_kind::string), *example_value::from_text("\"42\""),
                       context::shot_origin::bank, 1});
    auto two = prompt::render(c);
    CHECK(two.find("example_0 = \"EUR\"\n") != std::string::npos);
    CHECK(two.find("example_1 = \"42\"\n") != std::string::npos);
    CHECK(two.ends_with("example_2 = "));
}

TEST_CASE("running example prompts keep the documented layout") {
    auto p = running_example_prompts();
    CHECK(p.greedy.find("# must generate a unique currency string\nexample_5 = ") != std::string::npos);
    CHECK(p.greedy.ends_with("example_5 = "));
    CHECK(p.greedy.find("\"description\": \"The currency code (ISO 4217)\"") != std::string::npos);
    REQUIRE(p.diverse.size() == 10);
    for (const auto& d : p.diverse) {
        CHECK(d.ends_with("# must generate a unique currency string\nexample_6 = "));
        CHECK(d.find("example_5 = \"USD\"\n") != std::string::npos);
    }
}

TEST_CASE("replay backend consumes responses in order then falls back") {
    gw::replay_backend r;
    r.add_response("a", "1");
    r.add_response("a", "2");
    gw::generation_request req;
    req.prompt = "a";
    CHECK(r.generate(req).text == "1");
    CHECK(r.generate(req).text == "2");
    CHECK_THROWS_AS(r.generate(req), backend_rejected);
    r.set_default("d");
    CHECK(r.generate(req).text == "d");
    req.prompt = "unknown";
    CHECK(r.generate(req).text == "d");

    auto fixture = r.to_json();
    CHECK(fixture["default"] == "d");
    CHECK(fixture["responses"][text::sha256_hex("a")] == json::array({"1", "2"}));
    auto copy = gw::replay_backend::from_json(fixture);
    req.prompt = "a";
    CHECK(copy->generate(req).text == "1");

    CHECK_THROWS_AS(gw::replay_backend::from_json(json::array()), error);
    CHECK_THROWS_AS(gw::replay_backend::from_json(json{{"responses", {{"k", "notalist"}}}}), error);
    CHECK_THROWS_AS(gw::replay_backend::from_json(json{{"default", 3}}), error);
}

TEST_CASE("recording then replaying reproduces a run") {
    scratch_dir dir;
    synthetic_backend live;
    gw::recording_backend rec(live);
    auto set = running_example_prompts().diverse_contexts;
    auto first = gw::generate_diverse(rec, set);
    rec.save(dir / "rec.json");
    auto replay = gw::replay_backend::load(dir / "rec.json");
    auto second = gw::generate_diverse(*replay, set);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].text == second[i].text);
    }
    CHECK_THROWS_AS(gw::replay_backend::load(dir / "missing.json"), error);
    write_file(dir / "bad.json", "{oops");
    CHECK_THROWS_AS(gw::replay_backend::load(dir / "bad.json"), error);
}

TEST_CASE("retry covers transport failures only") {
    gw::retry_policy fast{2, std::chrono::milliseconds(1)};
    gw::generation_request req;
    {
        log_capture logs;
        flaky_backend twice(2);
        CHECK(gw::generate_with_retry(twice, req, fast).text == "ok");
        CHECK(twice.calls() == 3);
        CHECK(logs.warnings.size() == 2);
    }
    flaky_backend always(10);
    CHECK_THROWS_AS(gw::generate_with_retry(always, req, fast), backend_unavailable);
    CHECK(always.calls() == 3);
    rejecting_backend no;
    CHECK_THROWS_AS(gw::generate_with_retry(no, req, fast), backend_rejected);
    CHECK(no.calls == 1);
}

TEST_CASE("greedy calls use temperature zero") {
    struct capture : gw::generation_backend {
        gw::generation_request seen;
        std::string id() const override { return "cap"; }
        gw::backend_capabilities capabilities() const override { return {true, true}; }
        gw::raw_generation generate(const gw::generation_request& r) override {
            seen = r;
            return {"x", "", 0};
        }
    } cap;
    auto p = running_example_prompts();
    auto out = gw::generate_greedy(cap, p.greedy_context);
    CHECK(cap.seen.temperature == 0.0);
    CHECK(cap.seen.prompt == p.greedy);
    CHECK(cap.seen.stop_sequences == std::vector<std::string>{"\n"});
    CHECK(out.backend_id == "cap");
}

TEST_CASE("diverse results keep context order regardless of parallelism") {
    auto set = toy_set(10);
    echo_backend be;
    gw::gateway_options one;
    one.parallelism = 1;
    gw::gateway_options eight;
    eight.parallelism = 8;
    auto a = gw::generate_diverse(be, set, one);
    auto b = gw::generate_diverse(be, set, eight);
    REQUIRE(a.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(a[i].text == b[i].text);
        CHECK(a[i].text == text::sha256_hex(prompt::render(set.contexts[i])).substr(0, 8));
    }
}

TEST_CASE("bounded backend caps concurrency") {
    echo_backend be;
    gw::bounded_backend bounded(be, 2);
    gw::gateway_options eight;
    eight.parallelism = 8;
    gw::generate_diverse(bounded, toy_set(10), eight);
    CHECK(bounded.peak_in_flight() <= 2);
    CHECK(bounded.peak_in_flight() >= 1);
}

TEST_CASE("a failed diverse call yields an empty slot; all failing throws") {
    auto set = toy_set(10);
    echo_backend fail_three({prompt::render(set.contexts[3])});
    log_capture logs;
    auto out = gw::generate_diverse(fail_three, set);
    REQUIRE(out.size() == 10);
    CHECK(out[3].text.empty());
    for (std::size_t i = 0; i < 10; ++i) {
        if (i != 3) {
            CHECK_FALSE(out[i].text.empty());
        }
    }
    CHECK(logs.any_contains("diverse call 3"));

    std::set<std::string> everything;
    for (const auto& c : set.contexts) {
        everything.insert(prompt::render(c));
    }
    echo_backend fail_all(everything);
    CHECK_THROWS_AS(gw::generate_diverse(fail_all, set), all_calls_failed);
}

TEST_CASE("identical prompts are answered in context order") {
    auto set = toy_set(1);
    for (int i = 0; i < 5; ++i) {
        set.contexts.push_back(set.contexts[0]);
    }
    gw::replay_backend r;
    auto prompt_text = prompt::render(set.contexts[0]);
    for (int i = 0; i < 6; ++i) {
        r.add_response(prompt_text, std::to_string(i));
    }
    gw::gateway_options opts;
    opts.parallelism = 6;
    auto out = gw::generate_diverse(r, set, opts);
    for (int i = 0; i < 6; ++i) {
        CHECK(out[static_cast<std::size_t>(i)].text == std::to_string(i));
    }
}

TEST_CASE("parse_generation") {
    auto str = schema_type::of(schema_kind::string);
    auto integer = schema_type::of(schema_kind::integer);
    CHECK(gw::parse_generation(" \"USD\"\nexample_7 = x", str)->raw_text() == "USD");
    CHECK(gw::parse_generation("'EUR'", str)->raw_text() == "EUR");
    CHECK(gw::parse_generation("USD", str)->raw_text() == "USD");
    CHECK(gw::parse_generation("\"42\"", str)->raw_text() == "\"42\"");
    CHECK(gw::parse_generation("\"42\"", str)->kind() == value_kind::string);
    CHECK(gw::parse_generation("42", integer)->kind() == value_kind::integer);
    CHECK(gw::parse_generation("\"42\"", integer)->kind() == value_kind::string);
    CHECK(gw::parse_generation("\"a\\u00e9\"", str)->text() == "a\xC3\xA9");
    CHECK_FALSE(gw::parse_generation("   \n42", integer).has_value());
    CHECK_FALSE(gw::parse_generation("", str).has_value());
    CHECK_FALSE(gw::parse_generation("\"\"", str).has_value());
    CHECK(gw::parse_generation("[1, 2]", schema_type::array_of(integer))->kind() == value_kind::array);
    CHECK(gw::parse_generation("\"x", str)->raw_text() == "\"x");
}

TEST_CASE("split_url") {
    CHECK(gw::split_url("http://h:1/v1/c") == std::pair<std::string, std::string>{"http://h:1", "/v1/c"});
    CHECK(gw::split_url("https://h") == std::pair<std::string, std::string>{"https://h", "/"});
    CHECK_THROWS_AS(gw::split_url("ftp://h/x"), config_error);
    CHECK_THROWS_AS(gw::split_url("nohost"), config_error);
    CHECK_THROWS_AS(gw::http_backend(gw::http_settings{}), config_error);
}

TEST_CASE("http backend against a local server") {
    local_server srv;
    json last;
    std::string auth;
    srv.server().Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
        last = json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"text": " \"USD\"\n"})", "application/json");
    });
    srv.server().Post("/reject", [](const httplib::Request&, httplib::Response& res) {
        res.status = 429;
        res.set_content("slow down", "text/plain");
    });
    srv.server().Post("/notext", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"other": 1})", "application/json");
    });

    gw::http_settings s;
    s.endpoint = srv.url("/v1/completions");
    s.api_key = "secret";
    s.timeout = std::chrono::milliseconds(2000);
    gw::http_backend be(s);
    gw::generation_request req;
    req.prompt = "hello";
    req.temperature = 0.5;
    auto out = be.generate(req);
    CHECK(out.text == " \"USD\"\n");
    CHECK(last["prompt"] == "hello");
    CHECK(last["temperature"] == 0.5);
    CHECK(last["max_tokens"] == 64);
    CHECK(last["stop"] == json::array({"\n"}));
    CHECK(auth == "Bearer secret");

    s.endpoint = srv.url("/reject");
    try {
        gw::http_backend(s).generate(req);
        FAIL("expected rejection");
    } catch (const backend_rejected& e) {
        CHECK(e.status() == 429);
        CHECK(e.body_excerpt() == "slow down");
    }
    s.endpoint = srv.url("/notext");
    CHECK_THROWS_AS(gw::http_backend(s).generate(req), backend_rejected);

    s.endpoint = "http://127.0.0.1:1/closed";
    s.timeout = std::chrono::milliseconds(200);
    CHECK_THROWS_AS(gw::http_backend(s).generate(req), backend_unavailable);
}

TEST_CASE("remote embedder against a local server") {
    local_server srv;
    srv.server().Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
        auto body = json::parse(req.body);
        json vectors = json::array();
        for (const auto& t : body["texts"]) {
            auto s = t.get<std::string>();
            vectors.push_back(s == "wide" ? json::array({1.0, 0.0, 0.0}) : json::array({3.0, 4.0}));
        }
        res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
    });
    embedding::remote_provider p(srv.url("/embed"));
    CHECK(p.dimension() == 0);
    auto v = p.embed("a");
    CHECK(p.dimension() == 2);
    CHECK(v.components()[0] == doctest::Approx(0.6));
    std::vector<std::string> batch{"b", "c"};
    CHECK(p.embed_batch(batch).size() == 2);
    CHECK_THROWS_AS(p.embed("wide"), dimension_mismatch);
    CHECK_THROWS_AS(embedding::remote_provider(""), config_error);
}

}  // TEST_SUITE
