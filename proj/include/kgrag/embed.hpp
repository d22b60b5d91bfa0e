#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgrag/error.hpp"

namespace kgrag {

/// Unit-length (or all-zero) embedding. norm_flag is false only for the zero vector.
struct EmbeddingVector {
    std::vector<float> values;
    bool norm_flag = false;

    std::size_t dimension() const noexcept { return values.size(); }

    bool operator==(const EmbeddingVector&) const = default;
};

/// L2-normalizes `raw`; a zero-norm input stays zero with norm_flag=false.
inline EmbeddingVector normalize(std::vector<float> raw) {
    double sum = 0.0;
    for (float v : raw) sum += static_cast<double>(v) * static_cast<double>(v);
    EmbeddingVector out;
    if (sum == 0.0 || !std::isfinite(sum)) {
        std::fill(raw.begin(), raw.end(), 0.0f);
        out.values = std::move(raw);
        return out;
    }
    const double inv = 1.0 / std::sqrt(sum);
    for (float& v : raw) v = static_cast<float>(static_cast<double>(v) * inv);
    out.values = std::move(raw);
    out.norm_flag = true;
    return out;
}

/// Dot product accumulated in double, in index order.
inline double dot(std::span<const float> a, std::span<const float> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return sum;
}

/// Cosine of two provider vectors; zero vectors score 0.
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw Error(ErrorKind::dimension_mismatch, "cosine",
                    std::to_string(a.dimension()) + " vs " + std::to_string(b.dimension()));
    }
    if (!a.norm_flag || !b.norm_flag) return 0.0;
    return dot(a.values, b.values);
}

/**
 * Embedding backend. Implementations must be deterministic, return one
 * vector per input in input order, and tolerate concurrent calls.
 */
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// Declared dimension; 0 while a remote provider has not seen a response yet.
    virtual std::size_t dimension() const = 0;
    virtual std::string name() const = 0;
    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;

    EmbeddingVector embed(const std::string& text) const {
        auto out = embed_batch(std::span<const std::string>(&text, 1));
        return std::move(out.at(0));
    }
};

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = kFnvOffsetBasis;
    for (char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

inline constexpr std::size_t kMinHashDimension = 16;
inline constexpr std::size_t kDefaultHashDimension = 256;

/**
 * Character-trigram feature hashing: lowercase (ASCII), bucket every byte
 * trigram by FNV-1a 64 modulo d, count, then L2-normalize.
 */
inline EmbeddingVector hash_embed(std::string_view text, std::size_t dimension) {
    if (dimension < kMinHashDimension) {
        throw Error(ErrorKind::invalid_argument, "hash_embed",
                    "dimension must be >= 16, got " + std::to_string(dimension));
    }
    std::string lower(text);
    for (char& c : lower) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    std::vector<float> counts(dimension, 0.0f);
    if (lower.size() >= 3) {
        for (std::size_t i = 0; i + 3 <= lower.size(); ++i) {
            counts[fnv1a64(std::string_view(lower).substr(i, 3)) % dimension] += 1.0f;
        }
    }
    return normalize(std::move(counts));
}

class HashEmbedder final : public EmbeddingProvider {
public:
    explicit HashEmbedder(std::size_t dimension = kDefaultHashDimension) : dimension_(dimension) {
        if (dimension_ < kMinHashDimension) {
            throw Error(ErrorKind::invalid_argument, "HashEmbedder",
                        "dimension must be >= 16, got " + std::to_string(dimension_));
        }
    }

    std::size_t dimension() const override { return dimension_; }
    std::string name() const override { return "hash-trigram-" + std::to_string(dimension_); }

    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(hash_embed(t, dimension_));
        return out;
    }

private:
    std::size_t dimension_;
};

} // namespace kgrag
