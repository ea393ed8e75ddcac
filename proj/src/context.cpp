#include "icicl/context.hpp"

#include <random>
#include <string>

#include "icicl/error.hpp"
#include "icicl/log.hpp"

namespace icicl::context {

namespace {

std::vector<retrieval::scored_candidate> eligible(std::span<const retrieval::scored_candidate> candidates,
                                                  const parameter_bank& bank, const api_parameter& target,
                                                  const sampling_options& options) {
    auto out = retrieval::exclude_self(candidates, bank, target);
    if (out.empty()) {
        throw insufficient_bank("no eligible bank entries for " + target.param_name);
    }
    if (out.size() < options.shots) {
        if (!options.allow_degraded) {
            throw insufficient_bank("only " + std::to_string(out.size()) + " eligible bank entries, need " +
                                    std::to_string(options.shots));
        }
        log::warn("only " + std::to_string(out.size()) + " eligible bank entries for " + target.param_name +
                  "; contexts shrink accordingly");
    }
    return out;
}

shot bank_shot(const parameter_bank& bank, std::size_t entry_index) {
    const auto& e = bank.entries.at(entry_index);
    return shot{e.parameter, e.canonical_example, shot_origin::bank, entry_index};
}

}  // namespace

prompt_context greedy_context(std::span<const retrieval::scored_candidate> candidates,
                              const parameter_bank& bank, const api_parameter& target,
                              const sampling_options& options) {
    auto pool = eligible(candidates, bank, target, options);
    // exclude_self keeps the (score desc, index asc) order of its input.
    prompt_context ctx;
    ctx.target = target;
    for (const auto& c : retrieval::top_k(pool, options.shots)) {
        ctx.shots.push_back(bank_shot(bank, c.entry_index));
    }
    return ctx;
}

context_set sample_contexts(std::span<const retrieval::scored_candidate> candidates,
                            const parameter_bank& bank, const api_parameter& target,
                            const example_value& greedy_example, std::uint64_t seed,
                            const sampling_options& options) {
    auto pool = eligible(candidates, bank, target, options);
    std::vector<double> scores;
    scores.reserve(pool.size());
    for (const auto& c : pool) {
        scores.push_back(c.score);
    }
    std::mt19937_64 engine(seed);
    context_set set;
    set.seed = seed;
    for (std::size_t k = 0; k < options.contexts; ++k) {
        prompt_context ctx;
        ctx.target = target;
        for (auto pos : draw_without_replacement(std::span<const double>(scores), options.shots,
                                                 options.temperature, engine)) {
            ctx.shots.push_back(bank_shot(bank, pool[pos].entry_index));
        }
        ctx.shots.push_back(shot{target, greedy_example, shot_origin::greedy_self, std::nullopt});
        set.contexts.push_back(std::move(ctx));
    }
    return set;
}

}  // namespace icicl::context
