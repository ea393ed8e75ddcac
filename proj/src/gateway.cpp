#include "icicl/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <thread>

#include "icicl/error.hpp"
#include "icicl/log.hpp"
#include "icicl/prompt.hpp"
#include "icicl/text.hpp"

namespace icicl::gateway {

namespace {

raw_generation timed_call(generation_backend& backend, const generation_request& request,
                          const retry_policy& policy) {
    auto start = std::chrono::steady_clock::now();
    auto out = generate_with_retry(backend, request, policy);
    auto elapsed = std::chrono::steady_clock::now() - start;
    out.latency_ms = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count());
    if (out.backend_id.empty()) {
        out.backend_id = backend.id();
    }
    return out;
}

bool string_like(schema_kind kind) {
    return kind == schema_kind::string || kind == schema_kind::datetime || kind == schema_kind::enumeration;
}

}  // namespace

raw_generation generate_greedy(generation_backend& backend, const context::prompt_context& ctx,
                               const gateway_options& options) {
    generation_request request;
    request.prompt = prompt::render(ctx);
    request.temperature = 0.0;
    request.max_new_tokens = options.max_new_tokens;
    request.stop_sequences = options.stop_sequences;
    return timed_call(backend, request, options.retry);
}

std::vector<raw_generation> generate_diverse(generation_backend& backend, const context::context_set& set,
                                             const gateway_options& options) {
    const std::size_t n = set.contexts.size();
    std::vector<generation_request> requests(n);
    std::map<std::string, std::vector<std::size_t>> by_prompt;
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = requests[i];
        r.prompt = prompt::render(set.contexts[i]);
        r.temperature = options.diverse_temperature;
        r.max_new_tokens = options.max_new_tokens;
        r.stop_sequences = options.stop_sequences;
        r.seed = set.seed + 0x9E3779B97F4A7C15ULL * (i + 1);
        by_prompt[r.prompt].push_back(i);
    }
    // Groups ordered by their first context index.
    std::vector<std::vector<std::size_t>> groups;
    for (auto& [prompt, indices] : by_prompt) {
        groups.push_back(std::move(indices));
    }
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

    std::vector<raw_generation> results(n);
    std::vector<char> failed(n, 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t g = next++; g < groups.size(); g = next++) {
            for (auto i : groups[g]) {
                try {
                    results[i] = timed_call(backend, requests[i], options.retry);
                } catch (const error& e) {
                    log::warn("diverse call " + std::to_string(i) + " failed: " + e.what());
                    results[i] = raw_generation{"", backend.id(), 0};
                    failed[i] = 1;
                }
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallelism, groups.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (n > 0 && std::all_of(failed.begin(), failed.end(), [](char f) { return f != 0; })) {
        throw all_calls_failed("all " + std::to_string(n) + " diverse generation calls failed");
    }
    return results;
}

std::optional<example_value> parse_generation(std::string_view raw, const schema_type& declared_type) {
    auto first_line = raw.substr(0, raw.find('\n'));
    auto t = text::trim(first_line);
    if (t.empty()) {
        return std::nullopt;
    }
    if (string_like(declared_type.kind()) && t.size() >= 2 && (t.front() == '"' || t.front() == '\'') &&
        t.back() == t.front()) {
        std::string inner(t.substr(1, t.size() - 2));
        if (t.front() == '"') {
            auto decoded = json::parse(t.begin(), t.end(), nullptr, false);
            if (decoded.is_string()) {
                inner = decoded.get<std::string>();
            }
        }
        return example_value::from_json(json(inner));
    }
    return example_value::from_text(std::string(t));
}

}  // namespace icicl::gateway
