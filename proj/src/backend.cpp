#include "icicl/backend.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "icicl/error.hpp"
#include "icicl/log.hpp"
#include "icicl/text.hpp"

namespace icicl::gateway {

raw_generation generate_with_retry(generation_backend& backend, const generation_request& request,
                                   const retry_policy& policy) {
    for (int attempt = 0;; ++attempt) {
        try {
            return backend.generate(request);
        } catch (const backend_unavailable& e) {
            if (attempt >= policy.retries) {
                throw backend_unavailable(std::string(e.what()) + " (after " + std::to_string(policy.retries) +
                                          " retries)");
            }
            auto delay = policy.base_delay * (1 << attempt);
            log::warn(backend.id() + " unavailable, retrying in " + std::to_string(delay.count()) + "ms: " + e.what());
            std::this_thread::sleep_for(delay);
        }
    }
}

std::unique_ptr<replay_backend> replay_backend::from_json(const json& fixture) {
    if (!fixture.is_object()) {
        throw error("replay fixture must be a JSON object");
    }
    auto backend = std::make_unique<replay_backend>();
    if (auto d = fixture.find("default"); d != fixture.end() && !d->is_null()) {
        if (!d->is_string()) {
            throw error("replay fixture 'default' must be a string or null");
        }
        backend->default_ = d->get<std::string>();
    }
    if (auto r = fixture.find("responses"); r != fixture.end()) {
        if (!r->is_object()) {
            throw error("replay fixture 'responses' must be an object");
        }
        for (const auto& [hash, list] : r->items()) {
            if (!list.is_array()) {
                throw error("replay responses for " + hash + " must be an array");
            }
            auto& slot = backend->responses_[hash];
            for (const auto& item : list) {
                if (!item.is_string()) {
                    throw error("replay responses for " + hash + " must be strings");
                }
                slot.push_back(item.get<std::string>());
            }
        }
    }
    return backend;
}

std::unique_ptr<replay_backend> replay_backend::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error("cannot open replay fixture " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    auto parsed = json::parse(buf.str(), nullptr, false);
    if (parsed.is_discarded()) {
        throw error("replay fixture " + path.string() + " is not valid JSON");
    }
    return from_json(parsed);
}

void replay_backend::add_response(std::string_view prompt, std::string response) {
    std::lock_guard lock(mutex_);
    responses_[text::sha256_hex(prompt)].push_back(std::move(response));
}

void replay_backend::set_default(std::optional<std::string> response) {
    std::lock_guard lock(mutex_);
    default_ = std::move(response);
}

json replay_backend::to_json() const {
    std::lock_guard lock(mutex_);
    json responses = json::object();
    for (const auto& [hash, list] : responses_) {
        responses[hash] = list;
    }
    return json{{"default", default_ ? json(*default_) : json(nullptr)}, {"responses", std::move(responses)}};
}

raw_generation replay_backend::generate(const generation_request& request) {
    auto key = text::sha256_hex(request.prompt);
    std::lock_guard lock(mutex_);
    if (auto it = responses_.find(key); it != responses_.end()) {
        auto& pos = cursor_[key];
        if (pos < it->second.size()) {
            return {it->second[pos++], id(), 0};
        }
    }
    if (default_) {
        return {*default_, id(), 0};
    }
    throw backend_rejected(404, "no recorded response for prompt " + key);
}

json recording_backend::fixture() const {
    std::lock_guard lock(mutex_);
    return recorded_.to_json();
}

void recording_backend::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw error("cannot write replay fixture " + path.string());
    }
    out << fixture().dump(2) << '\n';
}

raw_generation recording_backend::generate(const generation_request& request) {
    auto result = inner_.generate(request);
    std::lock_guard lock(mutex_);
    recorded_.add_response(request.prompt, result.text);
    return result;
}

bounded_backend::bounded_backend(generation_backend& inner, std::size_t max_in_flight)
    : inner_(inner), limit_(max_in_flight == 0 ? 1 : max_in_flight) {}

std::size_t bounded_backend::peak_in_flight() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

raw_generation bounded_backend::generate(const generation_request& request) {
    {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return in_flight_ < limit_; });
        ++in_flight_;
        peak_ = std::max(peak_, in_flight_);
    }
    struct release {
        bounded_backend* self;
        ~release() {
            {
                std::lock_guard lock(self->mutex_);
                --self->in_flight_;
            }
            self->cv_.notify_one();
        }
    } guard{this};
    return inner_.generate(request);
}

}  // namespace icicl::gateway
