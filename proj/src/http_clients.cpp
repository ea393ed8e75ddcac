// HTTP clients for the completion backend and the remote embedding provider.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdlib>

#include "icicl/backend.hpp"
#include "icicl/embedding.hpp"
#include "icicl/error.hpp"

namespace icicl {

namespace {

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v == nullptr ? std::string() : std::string(v);
}

std::string excerpt(const std::string& body) { return body.size() <= 200 ? body : body.substr(0, 200) + "..."; }

json post_json(const std::string& url, const json& payload, const std::string& api_key,
               std::chrono::milliseconds timeout) {
    auto [base, path] = gateway::split_url(url);
    httplib::Client client(base);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key);
    }
    auto res = client.Post(path, headers, payload.dump(), "application/json");
    if (!res) {
        throw backend_unavailable("request to " + url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw backend_rejected(res->status, excerpt(res->body));
    }
    auto body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        throw backend_rejected(res->status, "response is not a JSON object: " + excerpt(res->body));
    }
    return body;
}

}  // namespace

namespace gateway {

std::pair<std::string, std::string> split_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw config_error("endpoint must be an http(s) URL: " + std::string(url));
    }
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw config_error("unsupported endpoint scheme: " + std::string(scheme));
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string_view::npos) {
        return {std::string(url), "/"};
    }
    return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

http_settings http_settings::from_env() {
    http_settings s;
    s.endpoint = env_or_empty("ICICL_LLM_ENDPOINT");
    s.api_key = env_or_empty("ICICL_LLM_API_KEY");
    if (auto t = env_or_empty("ICICL_LLM_TIMEOUT_MS"); !t.empty()) {
        try {
            s.timeout = std::chrono::milliseconds(std::stoll(t));
        } catch (const std::exception&) {
            throw config_error("ICICL_LLM_TIMEOUT_MS must be an integer, got '" + t + "'");
        }
    }
    return s;
}

http_backend::http_backend(http_settings settings) : settings_(std::move(settings)) {
    if (settings_.endpoint.empty()) {
        throw config_error("http backend needs an endpoint (ICICL_LLM_ENDPOINT)");
    }
    (void)split_url(settings_.endpoint);
}

std::string http_backend::id() const { return "http:" + settings_.endpoint; }

raw_generation http_backend::generate(const generation_request& request) {
    json payload{{"prompt", request.prompt},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_new_tokens},
                 {"stop", request.stop_sequences}};
    auto body = post_json(settings_.endpoint, payload, settings_.api_key, settings_.timeout);
    auto text = body.find("text");
    if (text == body.end() || !text->is_string()) {
        throw backend_rejected(200, "response lacks a string 'text' field");
    }
    return {text->get<std::string>(), id(), 0};
}

}  // namespace gateway

namespace embedding {

remote_provider::remote_provider(std::string endpoint, std::size_t expected_dimension)
    : endpoint_(std::move(endpoint)), dimension_(expected_dimension) {
    if (endpoint_.empty()) {
        throw config_error("remote embedder needs an endpoint (ICICL_EMBED_ENDPOINT)");
    }
    (void)gateway::split_url(endpoint_);
}

std::unique_ptr<remote_provider> remote_provider::from_env() {
    return std::make_unique<remote_provider>(env_or_empty("ICICL_EMBED_ENDPOINT"));
}

vector remote_provider::embed(std::string_view text) {
    std::vector<std::string> one{std::string(text)};
    return embed_batch(one).front();
}

std::vector<vector> remote_provider::embed_batch(std::span<const std::string> texts) {
    json payload{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    auto body = post_json(endpoint_, payload, {}, std::chrono::milliseconds(30000));
    auto vectors = body.find("vectors");
    if (vectors == body.end() || !vectors->is_array() || vectors->size() != texts.size()) {
        throw backend_rejected(200, "embedding response must carry one vector per text");
    }
    std::vector<vector> out;
    for (const auto& v : *vectors) {
        auto comps = v.get<std::vector<double>>();
        std::size_t expected = 0;
        if (!dimension_.compare_exchange_strong(expected, comps.size()) && comps.size() != expected) {
            throw dimension_mismatch(expected, comps.size());
        }
        out.push_back(vector::normalized(std::move(comps)));
    }
    return out;
}

}  // namespace embedding

}  // namespace icicl
