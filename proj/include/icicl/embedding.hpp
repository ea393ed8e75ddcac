#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icicl/document.hpp"

namespace icicl::embedding {

/// An L2-normalized vector.
class vector {
  public:
    vector() = default;
    /// Normalizes `components`; throws icicl::error on a zero vector.
    static vector normalized(std::vector<double> components);

    std::span<const double> components() const noexcept { return components_; }
    std::size_t dimension() const noexcept { return components_.size(); }

    friend bool operator==(const vector&, const vector&) = default;

  private:
    std::vector<double> components_;
};

/// Cosine similarity clamped to [-1, 1]; exactly 1 for identical vectors.
/// Throws dimension_mismatch.
double cosine(const vector& a, const vector& b);

class provider {
  public:
    virtual ~provider() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual bool is_deterministic() const = 0;
    virtual vector embed(std::string_view text) = 0;
    virtual std::vector<vector> embed_batch(std::span<const std::string> texts);
};

/// Hashed character-trigram term frequencies (ASCII-lowercased, boundary padded).
class trigram_provider : public provider {
  public:
    explicit trigram_provider(std::size_t dimension = 256) : dimension_(dimension) {}

    std::string id() const override { return "trigram-" + std::to_string(dimension_); }
    std::size_t dimension() const override { return dimension_; }
    bool is_deterministic() const override { return true; }
    vector embed(std::string_view text) override;

  private:
    std::size_t dimension_;
};

/// Fixed vectors from a JSON file {"dimension": D, "vectors": {"text": [..]}};
/// texts without a vector fall back to a trigram provider of the same dimension.
class fixture_provider : public provider {
  public:
    fixture_provider(std::size_t dimension, std::map<std::string, std::vector<double>> vectors);
    static std::unique_ptr<fixture_provider> from_json(const json& j);
    static std::unique_ptr<fixture_provider> load(const std::filesystem::path& path);

    std::string id() const override { return "fixture-" + std::to_string(dimension_); }
    std::size_t dimension() const override { return dimension_; }
    bool is_deterministic() const override { return true; }
    vector embed(std::string_view text) override;

  private:
    std::size_t dimension_;
    std::map<std::string, vector, std::less<>> vectors_;
    trigram_provider fallback_;
};

/// POST {"texts": [..]} -> {"vectors": [[..], ..]}; endpoint from ICICL_EMBED_ENDPOINT.
class remote_provider : public provider {
  public:
    remote_provider(std::string endpoint, std::size_t expected_dimension = 0);
    static std::unique_ptr<remote_provider> from_env();

    std::string id() const override { return "remote:" + endpoint_; }
    std::size_t dimension() const override { return dimension_.load(); }
    bool is_deterministic() const override { return false; }
    vector embed(std::string_view text) override;
    std::vector<vector> embed_batch(std::span<const std::string> texts) override;

  private:
    std::string endpoint_;
    std::atomic<std::size_t> dimension_;
};

}  // namespace icicl::embedding
