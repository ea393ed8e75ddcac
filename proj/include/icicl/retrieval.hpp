#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icicl/bank.hpp"

namespace icicl::retrieval {

/// Characters of the description kept in a query.
inline constexpr std::size_t kDescriptionPrefix = 50;

struct query {
    std::string text;
    std::vector<std::string> tokens;
};

/// description prefix, name and operation id, single-space joined; empty parts skipped.
query build_query(const api_parameter& param);

/// Lowercase tokens split on non-alphanumerics, camelCase humps and letter/digit changes.
/// Bytes >= 0x80 are treated as letters without case.
std::vector<std::string> tokenize(std::string_view text);

struct bm25_params {
    double k1 = 1.2;
    double b = 0.75;
};

struct posting {
    std::size_t entry_index;
    std::size_t term_frequency;
};

/// Inverted index over bank entries; immutable after construction.
class index {
  public:
    /// Each entry is indexed as the tokens of its own build_query. Throws empty_bank.
    static index build(const parameter_bank& bank);
    static index from_documents(const std::vector<std::vector<std::string>>& documents);

    std::size_t doc_count() const noexcept { return doc_lengths_.size(); }
    double avg_doc_len() const noexcept { return avg_doc_len_; }
    const std::vector<std::size_t>& doc_lengths() const noexcept { return doc_lengths_; }
    const std::map<std::string, std::size_t, std::less<>>& term_stats() const noexcept { return term_stats_; }
    std::size_t document_frequency(std::string_view term) const;
    std::span<const posting> postings(std::string_view term) const;

  private:
    std::vector<std::size_t> doc_lengths_;
    double avg_doc_len_ = 0.0;
    std::map<std::string, std::size_t, std::less<>> term_stats_;
    std::map<std::string, std::vector<posting>, std::less<>> postings_;
};

struct scored_candidate {
    std::size_t entry_index;
    double score;

    friend bool operator==(const scored_candidate&, const scored_candidate&) = default;
};

/// ln(1 + (N - df + 0.5) / (df + 0.5)); never negative.
double idf(std::size_t doc_count, std::size_t df) noexcept;

/// One candidate per document, sorted by (score desc, entry_index asc).
std::vector<scored_candidate> score_all(const index& idx, std::span<const std::string> query_tokens,
                                        bm25_params params = {});
std::vector<scored_candidate> score_all(const index& idx, const query& q, bm25_params params = {});

/// First min(k, |candidates|) candidates. k must be >= 1.
std::vector<scored_candidate> top_k(std::span<const scored_candidate> candidates, std::size_t k);

/// Drops candidates whose bank entry is the target itself (same api_name and source_pointer).
std::vector<scored_candidate> exclude_self(std::span<const scored_candidate> candidates,
                                           const parameter_bank& bank, const api_parameter& target);

}  // namespace icicl::retrieval
