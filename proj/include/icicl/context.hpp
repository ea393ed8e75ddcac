#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "icicl/bank.hpp"
#include "icicl/retrieval.hpp"

namespace icicl::context {

enum class shot_origin { bank, greedy_self };

struct shot {
    api_parameter parameter;
    example_value example;
    shot_origin origin = shot_origin::bank;
    /// Bank index for bank shots.
    std::optional<std::size_t> entry_index;
};

struct prompt_context {
    std::vector<shot> shots;
    api_parameter target;
};

struct context_set {
    std::vector<prompt_context> contexts;
    std::uint64_t seed = 0;
};

struct sampling_options {
    std::size_t shots = 5;
    std::size_t contexts = 10;
    /// Softmax temperature over min-max normalized scores. <= 0 selects greedily.
    double temperature = 0.05;
    /// Fewer eligible entries than `shots` shrinks contexts (with a warning) instead of failing.
    bool allow_degraded = true;
};

/// Top-scored eligible bank entries, highest first. Throws insufficient_bank.
prompt_context greedy_context(std::span<const retrieval::scored_candidate> candidates,
                              const parameter_bank& bank, const api_parameter& target,
                              const sampling_options& options = {});

/// `options.contexts` contexts, each with distinct sampled bank shots followed
/// by the greedy example as the final shot. Deterministic in (candidates, seed).
context_set sample_contexts(std::span<const retrieval::scored_candidate> candidates,
                            const parameter_bank& bank, const api_parameter& target,
                            const example_value& greedy_example, std::uint64_t seed,
                            const sampling_options& options = {});

/// Draws `count` distinct positions from `scores` without replacement, with
/// probability softmax(normalized score / temperature) over the remaining ones.
template <typename Engine>
std::vector<std::size_t> draw_without_replacement(std::span<const double> scores, std::size_t count,
                                                  double temperature, Engine& engine);

/// Uniform double in [0, 1) from 53 random bits; platform independent.
double unit_interval(std::uint64_t bits) noexcept;

}  // namespace icicl::context

#include <algorithm>
#include <cmath>

namespace icicl::context {

inline double unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

template <typename Engine>
std::vector<std::size_t> draw_without_replacement(std::span<const double> scores, std::size_t count,
                                                  double temperature, Engine& engine) {
    const std::size_t n = scores.size();
    count = std::min(count, n);
    std::vector<std::size_t> picked;
    picked.reserve(count);
    if (count == 0) {
        return picked;
    }
    auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    std::vector<double> normalized(n, 0.0);
    if (range > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            normalized[i] = (scores[i] - lo) / range;
        }
    }
    std::vector<bool> taken(n, false);
    std::vector<double> weights(n, 0.0);
    for (std::size_t draw = 0; draw < count; ++draw) {
        if (temperature <= 0.0) {
            // argmax limit: highest remaining, lowest position on ties.
            std::size_t best = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (!taken[i] && (best == n || normalized[i] > normalized[best])) {
                    best = i;
                }
            }
            taken[best] = true;
            picked.push_back(best);
            continue;
        }
        double top = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) {
                top = std::max(top, normalized[i]);
            }
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            weights[i] = taken[i] ? 0.0 : std::exp((normalized[i] - top) / temperature);
            total += weights[i];
        }
        double target = unit_interval(engine()) * total;
        std::size_t choice = n;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) {
                continue;
            }
            acc += weights[i];
            choice = i;
            if (target < acc) {
                break;
            }
        }
        taken[choice] = true;
        picked.push_back(choice);
    }
    return picked;
}

}  // namespace icicl::context
