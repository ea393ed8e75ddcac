#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icicl/document.hpp"

namespace icicl::gateway {

struct generation_request {
    std::string prompt;
    double temperature = 0.0;  ///< in [0, 2]
    std::size_t max_new_tokens = 64;
    std::vector<std::string> stop_sequences{"\n"};
    std::uint64_t seed = 0;
};

struct raw_generation {
    std::string text;
    std::string backend_id;
    std::uint64_t latency_ms = 0;
};

struct backend_capabilities {
    bool supports_temperature = true;
    bool is_deterministic = false;
};

/// A text-completion service. Implementations must tolerate concurrent calls.
/// Errors: backend_unavailable (transport, retriable), backend_rejected (status).
class generation_backend {
  public:
    virtual ~generation_backend() = default;
    virtual std::string id() const = 0;
    virtual backend_capabilities capabilities() const = 0;
    virtual raw_generation generate(const generation_request& request) = 0;
};

struct retry_policy {
    int retries = 2;
    std::chrono::milliseconds base_delay{250};
};

/// Retries transport failures only, with exponential backoff.
raw_generation generate_with_retry(generation_backend& backend, const generation_request& request,
                                   const retry_policy& policy = {});

/// Scripted backend keyed by sha256 of the prompt; responses are consumed in order,
/// then the default (if any) is returned.
///
///   {"default": "..." | null, "responses": {"<sha256 hex>": ["...", ...]}}
class replay_backend : public generation_backend {
  public:
    replay_backend() = default;
    static std::unique_ptr<replay_backend> from_json(const json& fixture);
    static std::unique_ptr<replay_backend> load(const std::filesystem::path& path);

    void add_response(std::string_view prompt, std::string response);
    void set_default(std::optional<std::string> response);
    json to_json() const;

    std::string id() const override { return "replay"; }
    backend_capabilities capabilities() const override { return {true, true}; }
    raw_generation generate(const generation_request& request) override;

  private:
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<std::string>> responses_;
    std::map<std::string, std::size_t> cursor_;
    std::optional<std::string> default_;
};

/// Forwards to another backend and records every response in replay format.
class recording_backend : public generation_backend {
  public:
    explicit recording_backend(generation_backend& inner) : inner_(inner) {}

    json fixture() const;
    void save(const std::filesystem::path& path) const;

    std::string id() const override { return inner_.id(); }
    backend_capabilities capabilities() const override { return inner_.capabilities(); }
    raw_generation generate(const generation_request& request) override;

  private:
    generation_backend& inner_;
    mutable std::mutex mutex_;
    replay_backend recorded_;
};

/// Caps the number of in-flight calls to the wrapped backend.
class bounded_backend : public generation_backend {
  public:
    bounded_backend(generation_backend& inner, std::size_t max_in_flight);

    std::size_t peak_in_flight() const;

    std::string id() const override { return inner_.id(); }
    backend_capabilities capabilities() const override { return inner_.capabilities(); }
    raw_generation generate(const generation_request& request) override;

  private:
    generation_backend& inner_;
    std::size_t limit_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t in_flight_ = 0;
    std::size_t peak_ = 0;
};

struct http_settings {
    std::string endpoint;  ///< e.g. http://localhost:8080/v1/completions
    std::string api_key;
    std::chrono::milliseconds timeout{30000};

    /// Reads ICICL_LLM_ENDPOINT, ICICL_LLM_API_KEY, ICICL_LLM_TIMEOUT_MS.
    static http_settings from_env();
};

/// POST {prompt, temperature, max_tokens, stop} -> {text}.
class http_backend : public generation_backend {
  public:
    explicit http_backend(http_settings settings);

    std::string id() const override;
    backend_capabilities capabilities() const override { return {true, false}; }
    raw_generation generate(const generation_request& request) override;

  private:
    http_settings settings_;
};

/// Splits an http(s) URL into "scheme://host:port" and a path (default "/").
std::pair<std::string, std::string> split_url(std::string_view url);

}  // namespace icicl::gateway
