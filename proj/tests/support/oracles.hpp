#pragma once

// Independent reference implementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "icicl/embedding.hpp"
#include "icicl/postprocess.hpp"

namespace icicl::oracle {

/// Textbook Okapi BM25 for every document, recomputed from scratch for each one.
inline std::vector<double> bm25(const std::vector<std::vector<std::string>>& docs,
                                const std::vector<std::string>& query, double k1 = 1.2, double b = 0.75) {
    const double n = static_cast<double>(docs.size());
    double total_len = 0.0;
    for (const auto& d : docs) {
        total_len += static_cast<double>(d.size());
    }
    const double avg = docs.empty() ? 0.0 : total_len / n;
    std::vector<double> scores;
    for (const auto& d : docs) {
        double score = 0.0;
        for (const auto& term : query) {
            double df = 0.0;
            for (const auto& other : docs) {
                df += std::count(other.begin(), other.end(), term) > 0 ? 1.0 : 0.0;
            }
            const double tf = static_cast<double>(std::count(d.begin(), d.end(), term));
            if (tf == 0.0) {
                continue;
            }
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double norm = avg > 0.0 ? static_cast<double>(d.size()) / avg : 0.0;
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
        }
        scores.push_back(score);
    }
    return scores;
}

inline std::string lower(const std::string& s) {
    std::string out = s;
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

struct selection {
    std::vector<std::string> raw;
    std::vector<postprocess::origin> origins;
};

/// Steps 1-5 written out directly. `accepts` stands in for the type check.
template <typename Accepts>
selection select(const std::string& greedy, const std::vector<std::string>& diverse, Accepts accepts,
                 embedding::provider& embedder, auto display) {
    // (1) type filter, (2) multiset with greedy first
    std::vector<std::string> all{greedy};
    for (const auto& d : diverse) {
        if (accepts(d)) {
            all.push_back(d);
        }
    }
    std::vector<std::string> keys;           // first-occurrence order
    std::map<std::string, std::string> first;  // key -> first casing
    std::map<std::string, int> count;
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto k = lower(all[i]);
        if (!count.contains(k)) {
            keys.push_back(k);
            first[k] = all[i];
            position[k] = i;
        }
        ++count[k];
    }
    // (3) greedy
    selection out;
    out.raw.push_back(greedy);
    out.origins.push_back(postprocess::origin::greedy);
    const auto greedy_key = lower(greedy);
    // (4) repeated values
    std::vector<std::string> repeated;
    for (const auto& k : keys) {
        if (k != greedy_key && count[k] >= 2) {
            repeated.push_back(k);
        }
    }
    std::sort(repeated.begin(), repeated.end(), [&](const std::string& a, const std::string& b) {
        return std::make_tuple(-count[a], position[a]) < std::make_tuple(-count[b], position[b]);
    });
    std::vector<std::string> chosen{greedy_key};
    for (const auto& k : repeated) {
        if (out.raw.size() == 3) {
            break;
        }
        out.raw.push_back(first[k]);
        out.origins.push_back(postprocess::origin::repeated);
        chosen.push_back(k);
    }
    if (out.raw.size() == 3) {
        return out;
    }
    // (5) nearest to greedy
    std::vector<std::pair<double, std::string>> rest;
    auto anchor = embedder.embed(display(greedy));
    for (const auto& k : keys) {
        if (std::find(chosen.begin(), chosen.end(), k) != chosen.end()) {
            continue;
        }
        rest.emplace_back(embedding::cosine(anchor, embedder.embed(display(first[k]))), k);
    }
    std::sort(rest.begin(), rest.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return position[a.second] < position[b.second];
    });
    for (const auto& [sim, k] : rest) {
        if (out.raw.size() == 3) {
            break;
        }
        out.raw.push_back(first[k]);
        out.origins.push_back(postprocess::origin::embedding_selected);
    }
    return out;
}

/// Sequential weighted draws without replacement from softmax(normalized / temperature),
/// using inverse-CDF sampling on a fresh uniform per draw.
inline std::vector<std::size_t> sample(const std::vector<double>& scores, std::size_t count, double temperature,
                                       std::mt19937_64& rng) {
    const double lo = *std::min_element(scores.begin(), scores.end());
    const double hi = *std::max_element(scores.begin(), scores.end());
    std::vector<double> w(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double norm = hi > lo ? (scores[i] - lo) / (hi - lo) : 0.0;
        w[i] = std::exp((norm - 1.0) / temperature);
    }
    std::vector<std::size_t> picked;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t draw = 0; draw < count && draw < scores.size(); ++draw) {
        double total = 0.0;
        for (double x : w) {
            total += x;
        }
        const double r = u(rng) * total;
        std::size_t i = w.size();
        double acc = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (w[j] == 0.0) {
                continue;
            }
            acc += w[j];
            i = j;
            if (r < acc) {
                break;
            }
        }
        picked.push_back(i);
        w[i] = 0.0;
    }
    return picked;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            idx[i] = i;
        }
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
                ++j;
            }
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        return r;
    };
    auto rx = ranks(x);
    auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

/// 1 - mean pairwise cosine, computed from raw component dot products.
inline double diversity(const std::vector<std::vector<double>>& vectors) {
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            double dot = 0, na = 0, nb = 0;
            for (std::size_t k = 0; k < vectors[i].size(); ++k) {
                dot += vectors[i][k] * vectors[j][k];
                na += vectors[i][k] * vectors[i][k];
                nb += vectors[j][k] * vectors[j][k];
            }
            sum += dot / std::sqrt(na * nb);
            ++pairs;
        }
    }
    return std::clamp(1.0 - sum / pairs, 0.0, 1.0);
}

}  // namespace icicl::oracle
