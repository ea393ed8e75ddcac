#include "icicl/postprocess.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>

#include "icicl/error.hpp"

namespace icicl::postprocess {

namespace {

bool digits(std::string_view s, std::size_t pos, std::size_t n, int& value) {
    if (pos + n > s.size()) {
        return false;
    }
    value = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') {
            return false;
        }
        value = value * 10 + (s[i] - '0');
    }
    return true;
}

bool full_date(std::string_view s) {
    int y = 0, m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !digits(s, 0, 4, y) || !digits(s, 5, 2, m) ||
        !digits(s, 8, 2, d)) {
        return false;
    }
    static constexpr std::array<int, 12> days{31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m < 1 || m > 12 || d < 1 || d > days[static_cast<std::size_t>(m - 1)]) {
        return false;
    }
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return !(m == 2 && d == 29 && !leap);
}

bool time_part(std::string_view s) {
    int h = 0, mi = 0, sec = 0;
    if (s.size() < 9 || s[2] != ':' || s[5] != ':' || !digits(s, 0, 2, h) || !digits(s, 3, 2, mi) ||
        !digits(s, 6, 2, sec) || h > 23 || mi > 59 || sec > 60) {
        return false;
    }
    std::size_t pos = 8;
    if (s[pos] == '.') {
        std::size_t start = ++pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            ++pos;
        }
        if (pos == start) {
            return false;
        }
    }
    auto offset = s.substr(pos);
    if (offset == "Z" || offset == "z") {
        return true;
    }
    int oh = 0, om = 0;
    return offset.size() == 6 && (offset[0] == '+' || offset[0] == '-') && offset[3] == ':' &&
           digits(offset, 1, 2, oh) && digits(offset, 4, 2, om) && oh <= 23 && om <= 59;
}

struct distinct_value {
    example_value value;  // first-seen casing
    std::size_t multiplicity = 0;
    std::size_t first_seen = 0;
};

}  // namespace

bool is_rfc3339(std::string_view s) {
    if (s.size() == 10) {
        return full_date(s);
    }
    return s.size() > 11 && (s[10] == 'T' || s[10] == 't') && full_date(s.substr(0, 10)) && time_part(s.substr(11));
}

bool type_check(const example_value& value, const schema_type& type) {
    switch (type.kind()) {
        case schema_kind::string:
            return value.kind() == value_kind::string;
        case schema_kind::integer:
            return value.kind() == value_kind::integer;
        case schema_kind::number:
            return value.kind() == value_kind::integer || value.kind() == value_kind::number;
        case schema_kind::boolean:
            return value.kind() == value_kind::boolean;
        case schema_kind::object:
            return value.kind() == value_kind::object;
        case schema_kind::datetime:
            return value.kind() == value_kind::string && is_rfc3339(value.text());
        case schema_kind::enumeration: {
            const auto& allowed = type.enum_values();
            return std::find(allowed.begin(), allowed.end(), value.text()) != allowed.end();
        }
        case schema_kind::array: {
            if (value.kind() != value_kind::array) {
                return false;
            }
            const schema_type* item = type.item();
            if (item == nullptr || item->kind() == schema_kind::unknown) {
                return true;
            }
            for (const auto& element : value.to_json()) {
                auto ev = example_value::from_json(element);
                if (!ev || !type_check(*ev, *item)) {
                    return false;
                }
            }
            return true;
        }
        case schema_kind::unknown:
            return true;
    }
    return false;
}

std::string_view to_string(origin p) noexcept {
    switch (p) {
        case origin::greedy:
            return "greedy";
        case origin::repeated:
            return "repeated";
        case origin::embedding_selected:
            return "embedding_selected";
        case origin::schema_declared:
            return "schema_declared";
    }
    return {};
}

std::optional<origin> parse_origin(std::string_view name) noexcept {
    for (auto p : {origin::greedy, origin::repeated, origin::embedding_selected,
                   origin::schema_declared}) {
        if (to_string(p) == name) {
            return p;
        }
    }
    return std::nullopt;
}

example_set select_examples(const candidate_pool& pool, embedding::provider& embedder) {
    if (!pool.greedy || !type_check(*pool.greedy, pool.target_type)) {
        throw greedy_missing(pool.greedy ? "greedy example '" + pool.greedy->raw_text() + "' fails its type check"
                                         : "no greedy example");
    }

    // Greedy first, then type-correct diverse candidates, merged case-insensitively.
    std::vector<distinct_value> distinct;
    auto add = [&distinct](const example_value& v, std::size_t order) {
        auto key = v.folded();
        for (auto& d : distinct) {
            if (d.value.folded() == key) {
                ++d.multiplicity;
                return;
            }
        }
        distinct.push_back({v, 1, order});
    };
    add(*pool.greedy, 0);
    std::size_t order = 1;
    for (const auto& v : pool.diverse) {
        if (type_check(v, pool.target_type)) {
            add(v, order);
        }
        ++order;
    }

    example_set out;
    out.examples.push_back(distinct.front().value);
    out.provenance.push_back(origin::greedy);
    out.greedy_included = true;

    std::vector<std::size_t> rest(distinct.size() - 1);
    std::iota(rest.begin(), rest.end(), std::size_t{1});

    std::vector<std::size_t> repeated;
    for (auto i : rest) {
        if (distinct[i].multiplicity >= 2) {
            repeated.push_back(i);
        }
    }
    std::stable_sort(repeated.begin(), repeated.end(), [&](std::size_t a, std::size_t b) {
        return distinct[a].multiplicity > distinct[b].multiplicity;
    });
    std::vector<bool> used(distinct.size(), false);
    used[0] = true;
    for (auto i : repeated) {
        if (out.examples.size() >= kMaxExamples) {
            break;
        }
        out.examples.push_back(distinct[i].value);
        out.provenance.push_back(origin::repeated);
        used[i] = true;
    }
    if (out.examples.size() >= kMaxExamples) {
        return out;
    }

    std::vector<std::size_t> remaining;
    for (auto i : rest) {
        if (!used[i]) {
            remaining.push_back(i);
        }
    }
    if (remaining.empty()) {
        return out;
    }
    const auto anchor = embedder.embed(distinct[0].value.text());
    std::vector<double> similarity(distinct.size(), 0.0);
    for (auto i : remaining) {
        similarity[i] = embedding::cosine(anchor, embedder.embed(distinct[i].value.text()));
    }
    std::stable_sort(remaining.begin(), remaining.end(),
                     [&](std::size_t a, std::size_t b) { return similarity[a] > similarity[b]; });
    for (auto i : remaining) {
        if (out.examples.size() >= kMaxExamples) {
            break;
        }
        out.examples.push_back(distinct[i].value);
        out.provenance.push_back(origin::embedding_selected);
    }
    return out;
}

json to_json(const example_set& set) {
    json examples = json::array();
    json prov = json::array();
    for (std::size_t i = 0; i < set.examples.size(); ++i) {
        examples.push_back(icicl::to_json(set.examples[i]));
        prov.push_back(std::string(to_string(set.provenance[i])));
    }
    return json{{"examples", std::move(examples)}, {"provenance", std::move(prov)},
                {"greedy_included", set.greedy_included}};
}

example_set example_set_from_json(const json& j) {
    if (!j.is_object() || !j.contains("examples") || !j.contains("provenance") || !j.contains("greedy_included")) {
        throw error("example set needs examples, provenance and greedy_included");
    }
    example_set out;
    for (const auto& e : j.at("examples")) {
        out.examples.push_back(example_value_from_json(e));
    }
    for (const auto& p : j.at("provenance")) {
        auto parsed = p.is_string() ? parse_origin(p.get<std::string>()) : std::nullopt;
        if (!parsed) {
            throw error("unknown provenance " + p.dump());
        }
        out.provenance.push_back(*parsed);
    }
    if (out.examples.size() != out.provenance.size() || out.examples.empty() ||
        out.examples.size() > kMaxExamples) {
        throw error("example set must hold 1-3 examples with one provenance each");
    }
    out.greedy_included = j.at("greedy_included").get<bool>();
    return out;
}

}  // namespace icicl::postprocess
