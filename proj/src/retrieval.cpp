#include "icicl/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icicl/error.hpp"
#include "icicl/text.hpp"

namespace icicl::retrieval {

namespace {

enum class char_class { separator, lower, upper, digit, other_letter };

char_class class_of(unsigned char c) {
    if (c >= 'a' && c <= 'z') {
        return char_class::lower;
    }
    if (c >= 'A' && c <= 'Z') {
        return char_class::upper;
    }
    if (c >= '0' && c <= '9') {
        return char_class::digit;
    }
    if (c >= 0x80) {
        return char_class::other_letter;
    }
    return char_class::separator;
}

void sort_candidates(std::vector<scored_candidate>& c) {
    std::sort(c.begin(), c.end(), [](const scored_candidate& a, const scored_candidate& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.entry_index < b.entry_index;
    });
}

}  // namespace

query build_query(const api_parameter& param) {
    query q;
    auto add = [&q](std::string_view part) {
        if (part.empty()) {
            return;
        }
        if (!q.text.empty()) {
            q.text.push_back(' ');
        }
        q.text += part;
    };
    add(text::utf8_prefix(param.description, kDescriptionPrefix));
    add(param.param_name);
    add(param.operation_id);
    q.tokens = tokenize(q.text);
    return q;
}

std::vector<std::string> tokenize(std::string_view input) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(text::ascii_lower(current));
            current.clear();
        }
    };
    for (std::size_t i = 0; i < input.size(); ++i) {
        auto c = static_cast<unsigned char>(input[i]);
        auto cls = class_of(c);
        if (cls == char_class::separator) {
            flush();
            continue;
        }
        if (!current.empty()) {
            auto prev = class_of(static_cast<unsigned char>(current.back()));
            bool boundary = false;
            if ((prev == char_class::digit) != (cls == char_class::digit)) {
                boundary = true;  // letter <-> digit
            } else if ((prev == char_class::lower || prev == char_class::other_letter) &&
                       cls == char_class::upper) {
                boundary = true;  // camelCase hump
            } else if (prev == char_class::upper && cls == char_class::upper && i + 1 < input.size() &&
                       class_of(static_cast<unsigned char>(input[i + 1])) == char_class::lower) {
                boundary = true;  // HTTPServer -> HTTP | Server
            }
            if (boundary) {
                flush();
            }
        }
        current.push_back(static_cast<char>(c));
    }
    flush();
    return tokens;
}

index index::from_documents(const std::vector<std::vector<std::string>>& documents) {
    index idx;
    idx.doc_lengths_.reserve(documents.size());
    std::size_t total = 0;
    for (std::size_t d = 0; d < documents.size(); ++d) {
        const auto& doc = documents[d];
        idx.doc_lengths_.push_back(doc.size());
        total += doc.size();
        std::map<std::string_view, std::size_t> tf;
        for (const auto& term : doc) {
            ++tf[term];
        }
        for (const auto& [term, count] : tf) {
            auto key = std::string(term);
            ++idx.term_stats_[key];
            idx.postings_[key].push_back({d, count});
        }
    }
    idx.avg_doc_len_ = documents.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(documents.size());
    return idx;
}

index index::build(const parameter_bank& bank) {
    if (bank.entries.empty()) {
        throw empty_bank("cannot build a retrieval index over an empty bank");
    }
    std::vector<std::vector<std::string>> docs;
    docs.reserve(bank.entries.size());
    for (const auto& e : bank.entries) {
        docs.push_back(build_query(e.parameter).tokens);
    }
    return from_documents(docs);
}

std::size_t index::document_frequency(std::string_view term) const {
    auto it = term_stats_.find(term);
    return it == term_stats_.end() ? 0 : it->second;
}

std::span<const posting> index::postings(std::string_view term) const {
    auto it = postings_.find(term);
    if (it == postings_.end()) {
        return {};
    }
    return it->second;
}

double idf(std::size_t doc_count, std::size_t df) noexcept {
    auto n = static_cast<double>(doc_count);
    auto f = static_cast<double>(df);
    return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

std::vector<scored_candidate> score_all(const index& idx, std::span<const std::string> query_tokens,
                                        bm25_params params) {
    std::vector<scored_candidate> out(idx.doc_count());
    for (std::size_t d = 0; d < out.size(); ++d) {
        out[d] = {d, 0.0};
    }
    const double avg = idx.avg_doc_len();
    for (const auto& term : query_tokens) {
        auto plist = idx.postings(term);
        if (plist.empty()) {
            continue;
        }
        const double w = idf(idx.doc_count(), plist.size());
        for (const auto& p : plist) {
            auto tf = static_cast<double>(p.term_frequency);
            double norm = avg > 0.0 ? static_cast<double>(idx.doc_lengths()[p.entry_index]) / avg : 0.0;
            out[p.entry_index].score += w * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * norm));
        }
    }
    sort_candidates(out);
    return out;
}

std::vector<scored_candidate> score_all(const index& idx, const query& q, bm25_params params) {
    return score_all(idx, std::span<const std::string>(q.tokens), params);
}

std::vector<scored_candidate> top_k(std::span<const scored_candidate> candidates, std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("top_k requires k >= 1");
    }
    auto n = std::min(k, candidates.size());
    return {candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<scored_candidate> exclude_self(std::span<const scored_candidate> candidates,
                                           const parameter_bank& bank, const api_parameter& target) {
    std::vector<scored_candidate> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
        if (!same_site(bank.entries.at(c.entry_index).parameter, target)) {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace icicl::retrieval
