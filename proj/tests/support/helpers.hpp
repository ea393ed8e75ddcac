#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "icicl/backend.hpp"
#include "icicl/bank.hpp"
#include "icicl/context.hpp"
#include "icicl/extract.hpp"
#include "icicl/gateway.hpp"
#include "icicl/log.hpp"
#include "icicl/pipeline.hpp"
#include "icicl/prompt.hpp"
#include "icicl/retrieval.hpp"
#include "icicl/text.hpp"

namespace icicl::testing {

inline std::filesystem::path data_dir() { return ICICL_TEST_DATA; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Fresh directory removed on destruction.
class scratch_dir {
  public:
    explicit scratch_dir(std::string_view tag = "icicl") {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (std::string(tag) + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~scratch_dir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    scratch_dir(const scratch_dir&) = delete;
    scratch_dir& operator=(const scratch_dir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

/// Collects warnings while alive; restores the default sink afterwards.
class log_capture {
  public:
    log_capture() {
        log::set_sink([this](log::level lvl, std::string_view message) {
            if (lvl == log::level::warning) {
                warnings.emplace_back(message);
            }
        });
    }
    ~log_capture() { log::set_sink({}); }
    log_capture(const log_capture&) = delete;
    log_capture& operator=(const log_capture&) = delete;

    bool any_contains(std::string_view needle) const {
        for (const auto& w : warnings) {
            if (w.find(needle) != std::string::npos) {
                return true;
            }
        }
        return false;
    }

    std::vector<std::string> warnings;
};

inline const parameter_bank& fixture_bank() {
    static const parameter_bank bank = mine_bank(data_dir() / "corpus");
    return bank;
}

/// Answers with a value of the target's declared type, chosen from the prompt
/// hash and seed. Greedy calls (temperature 0) ignore the seed.
class synthetic_backend : public gateway::generation_backend {
  public:
    std::string id() const override { return "synthetic"; }
    gateway::backend_capabilities capabilities() const override { return {true, true}; }

    gateway::raw_generation generate(const gateway::generation_request& request) override {
        calls_++;
        auto type = target_type(request.prompt);
        std::uint64_t h = std::stoull(text::sha256_hex(request.prompt).substr(0, 12), nullptr, 16);
        std::size_t pick = request.temperature == 0.0 ? 0 : static_cast<std::size_t>((h ^ request.seed) % 5);
        return {answer(type, pick), id(), 0};
    }

    std::size_t calls() const { return calls_.load(); }

    static std::string target_type(const std::string& prompt) {
        auto at = prompt.rfind("\"type\": \"");
        if (at == std::string::npos) {
            return "unknown";
        }
        at += 9;
        return prompt.substr(at, prompt.find('"', at) - at);
    }

    static std::string answer(const std::string& type, std::size_t pick) {
        static const char* strings[] = {"\"alpha\"", "\"bravo\"", "\"alpha\"", "\"delta\"", "\"echo\""};
        static const char* integers[] = {"1", "2", "1", "40", "7"};
        static const char* numbers[] = {"1.5", "2", "1.5", "-3.25", "10"};
        static const char* dates[] = {"\"2021-03-04\"", "\"2022-11-30\"", "\"2021-03-04\"", "\"2020-02-29\"",
                                      "\"2019-07-01\""};
        static const char* instants[] = {"\"2021-03-04T10:00:00Z\"", "\"2022-11-30T08:15:00+01:00\"",
                                         "\"2021-03-04T10:00:00Z\"", "\"2020-02-29T23:59:59Z\"",
                                         "\"2019-07-01T00:00:00Z\""};
        if (type == "integer") return integers[pick];
        if (type == "number") return numbers[pick];
        if (type == "datetime") return pick % 2 == 0 ? dates[pick] : instants[pick];
        if (type == "array") return pick % 2 == 0 ? "[\"a\", \"b\"]" : "[\"c\"]";
        if (type == "object") return "{\"k\": " + std::to_string(pick) + "}";
        return strings[pick];
    }

  private:
    std::atomic<std::size_t> calls_{0};
};

/// The diverse returns of the running example, in context order.
inline const std::vector<std::string>& running_diverse_returns() {
    static const std::vector<std::string> values{"USD", "GPP", "USD", "CAD", "ZAR",
                                                 "CAD", "INR", "MXN", "CNY", "EUR"};
    return values;
}

inline constexpr std::uint64_t kRunningSeed = 42;

struct running_prompts {
    std::string greedy;
    std::vector<std::string> diverse;
    context::prompt_context greedy_context;
    context::context_set diverse_contexts;
};

/// Prompts the pipeline issues for the running example under default settings.
inline running_prompts running_example_prompts() {
    auto doc = load_document(data_dir() / "running" / "rest-countries.yaml");
    auto target = extract_parameters(doc).at(0);
    const auto& bank = fixture_bank();
    auto idx = retrieval::index::build(bank);
    auto candidates = retrieval::score_all(idx, retrieval::build_query(target));
    pipeline::run_config defaults;
    context::sampling_options opts;
    opts.shots = defaults.shots;
    opts.contexts = defaults.contexts;
    opts.temperature = defaults.sampling_temperature;
    running_prompts out;
    out.greedy_context = context::greedy_context(candidates, bank, target, opts);
    out.greedy = prompt::render(out.greedy_context);
    auto greedy = *example_value::from_text("USD");
    out.diverse_contexts = context::sample_contexts(candidates, bank, target, greedy,
                                                    pipeline::parameter_seed(kRunningSeed, target), opts);
    for (const auto& c : out.diverse_contexts.contexts) {
        out.diverse.push_back(prompt::render(c));
    }
    return out;
}

/// Replay fixture scripting the running example: greedy "USD", then the ten diverse returns.
inline json running_replay_fixture() {
    auto prompts = running_example_prompts();
    gateway::replay_backend replay;
    replay.add_response(prompts.greedy, "\"USD\"");
    const auto& returns = running_diverse_returns();
    for (std::size_t i = 0; i < prompts.diverse.size(); ++i) {
        replay.add_response(prompts.diverse[i], "\"" + returns[i] + "\"");
    }
    return replay.to_json();
}

}  // namespace icicl::testing
