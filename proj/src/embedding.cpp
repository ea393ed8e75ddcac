#include "icicl/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "icicl/error.hpp"
#include "icicl/text.hpp"

namespace icicl::embedding {

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

vector vector::normalized(std::vector<double> components) {
    double sq = 0.0;
    for (double c : components) {
        if (!std::isfinite(c)) {
            throw error("embedding component is not finite");
        }
        sq += c * c;
    }
    if (sq == 0.0) {
        throw error("cannot normalize a zero embedding");
    }
    const double norm = std::sqrt(sq);
    for (double& c : components) {
        c /= norm;
    }
    vector v;
    v.components_ = std::move(components);
    return v;
}

double cosine(const vector& a, const vector& b) {
    if (a.dimension() != b.dimension()) {
        throw dimension_mismatch(a.dimension(), b.dimension());
    }
    if (a == b) {
        return 1.0;
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    auto ca = a.components();
    auto cb = b.components();
    for (std::size_t i = 0; i < ca.size(); ++i) {
        dot += ca[i] * cb[i];
        na += ca[i] * ca[i];
        nb += cb[i] * cb[i];
    }
    if (dot == 0.0) {
        return 0.0;
    }
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

std::vector<vector> provider::embed_batch(std::span<const std::string> texts) {
    std::vector<vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(embed(t));
    }
    return out;
}

vector trigram_provider::embed(std::string_view input) {
    // \x02 and \x03 mark the start and end of the text.
    std::string padded = "\x02" + text::ascii_lower(input) + "\x03";
    std::vector<double> counts(dimension_, 0.0);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        counts[fnv1a(std::string_view(padded).substr(i, 3)) % dimension_] += 1.0;
    }
    if (padded.size() < 3) {
        counts[fnv1a(padded) % dimension_] += 1.0;
    }
    return vector::normalized(std::move(counts));
}

fixture_provider::fixture_provider(std::size_t dimension, std::map<std::string, std::vector<double>> vectors)
    : dimension_(dimension), fallback_(dimension) {
    for (auto& [text, comps] : vectors) {
        if (comps.size() != dimension) {
            throw dimension_mismatch(dimension, comps.size());
        }
        vectors_.emplace(text, vector::normalized(std::move(comps)));
    }
}

std::unique_ptr<fixture_provider> fixture_provider::from_json(const json& j) {
    if (!j.is_object() || !j.contains("dimension") || !j.at("dimension").is_number_unsigned() ||
        !j.contains("vectors") || !j.at("vectors").is_object()) {
        throw error("embedding fixture needs {\"dimension\": N, \"vectors\": {...}}");
    }
    std::map<std::string, std::vector<double>> vectors;
    for (const auto& [text, comps] : j.at("vectors").items()) {
        vectors[text] = comps.get<std::vector<double>>();
    }
    return std::make_unique<fixture_provider>(j.at("dimension").get<std::size_t>(), std::move(vectors));
}

std::unique_ptr<fixture_provider> fixture_provider::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error("cannot open embedding fixture " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    auto parsed = json::parse(buf.str(), nullptr, false);
    if (parsed.is_discarded()) {
        throw error("embedding fixture " + path.string() + " is not valid JSON");
    }
    return from_json(parsed);
}

vector fixture_provider::embed(std::string_view text) {
    if (auto it = vectors_.find(text); it != vectors_.end()) {
        return it->second;
    }
    return fallback_.embed(text);
}

}  // namespace icicl::embedding
