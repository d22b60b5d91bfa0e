#pragma once

// Corpus chunking and an exact (flat) cosine index.

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgrag/embed.hpp"
#include "kgrag/error.hpp"
#include "kgrag/io.hpp"

namespace kgrag {

enum class ChunkKind { raw, kg };

inline std::string_view to_string(ChunkKind kind) { return kind == ChunkKind::raw ? "raw" : "kg"; }

inline ChunkKind parse_chunk_kind(std::string_view s) {
    if (s == "raw") return ChunkKind::raw;
    if (s == "kg") return ChunkKind::kg;
    throw Error(ErrorKind::schema_violation, "kind", "unknown chunk kind \"" + std::string(s) + "\"");
}

struct DocumentChunk {
    std::string chunk_id;
    std::string text;
    ChunkKind kind = ChunkKind::raw;
    std::string provenance;
    std::size_t offset = 0; // byte offset of `text` within its source document

    bool operator==(const DocumentChunk&) const = default;
};

struct SourceDocument {
    std::string text;
    std::string provenance;
};

struct ChunkingParams {
    std::size_t max_chars = 512;
    std::size_t overlap_chars = 64;

    void validate() const {
        if (max_chars < 64 || overlap_chars >= max_chars) {
            throw Error(ErrorKind::invalid_chunk_params, "chunking",
                        "need max_chars >= 64 and overlap_chars < max_chars (got " +
                            std::to_string(max_chars) + ", " + std::to_string(overlap_chars) + ")");
        }
    }

    bool operator==(const ChunkingParams&) const = default;
};

namespace detail {

inline bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// A cut may fall at the end of text or at the start of a word.
inline bool is_cut(std::string_view t, std::size_t p) {
    return p == t.size() || (p > 0 && is_ws(t[p - 1]) && !is_ws(t[p]));
}

inline bool is_utf8_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

} // namespace detail

/**
 * Splits each document into windows of at most max_chars bytes that end on
 * word boundaries. Consecutive windows share at most overlap_chars bytes;
 * the next window starts at the first word boundary inside the overlap
 * region. Chunks are exact substrings, so the document is recoverable from
 * the chunk offsets. A word longer than max_chars is cut hard (on a UTF-8
 * character boundary). Empty and whitespace-only documents yield nothing.
 */
inline std::vector<DocumentChunk> chunk_documents(std::span<const SourceDocument> docs,
                                                  const ChunkingParams& params,
                                                  ChunkKind kind = ChunkKind::raw) {
    params.validate();
    std::vector<DocumentChunk> chunks;
    for (const auto& doc : docs) {
        const std::string_view t = doc.text;
        if (t.find_first_not_of(" \t\r\n") == std::string_view::npos) continue;
        std::size_t start = 0;
        std::size_t index = 0;
        while (true) {
            std::size_t end = t.size();
            if (t.size() - start > params.max_chars) {
                end = start + params.max_chars;
                while (end > start && !detail::is_cut(t, end)) --end;
                if (end == start) {
                    end = start + params.max_chars;
                    while (end > start + 1 && detail::is_utf8_continuation(t[end])) --end;
                }
            }
            chunks.push_back({doc.provenance + "#" + std::to_string(index++),
                              std::string(t.substr(start, end - start)), kind, doc.provenance,
                              start});
            if (end == t.size()) break;

            std::size_t next = end;
            const std::size_t floor = std::max(start + 1, end - std::min(end, params.overlap_chars));
            for (std::size_t p = floor; p < end; ++p) {
                if (detail::is_cut(t, p)) {
                    next = p;
                    break;
                }
            }
            start = next;
        }
    }
    return chunks;
}

struct ScoredChunk {
    std::string chunk_id;
    double score = 0.0;

    bool operator==(const ScoredChunk&) const = default;
};

inline constexpr std::array<char, 8> kIndexMagic = {'K', 'G', 'R', 'A', 'G', 'I', 'D', 'X'};

/**
 * Exact flat index over unit vectors. Immutable once built; top_k is safe
 * from concurrent readers.
 */
class VectorIndex {
public:
    explicit VectorIndex(std::size_t dimension = 0) : dimension_(dimension) {}

    VectorIndex(std::size_t dimension, std::vector<DocumentChunk> chunks,
                std::span<const EmbeddingVector> vectors)
        : dimension_(dimension) {
        if (chunks.size() != vectors.size()) {
            throw Error(ErrorKind::invalid_argument, "VectorIndex",
                        "chunk and vector counts differ");
        }
        data_.reserve(chunks.size() * dimension);
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            if (vectors[i].dimension() != dimension_) {
                throw Error(ErrorKind::dimension_mismatch, chunks[i].chunk_id,
                            "expected " + std::to_string(dimension_) + ", got " +
                                std::to_string(vectors[i].dimension()));
            }
            data_.insert(data_.end(), vectors[i].values.begin(), vectors[i].values.end());
        }
        set_chunks(std::move(chunks));
    }

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return chunks_.size(); }
    bool empty() const noexcept { return chunks_.empty(); }

    const std::vector<DocumentChunk>& chunks() const noexcept { return chunks_; }

    std::span<const float> vector(std::size_t i) const {
        return std::span<const float>(data_).subspan(i * dimension_, dimension_);
    }

    const DocumentChunk& chunk(std::string_view chunk_id) const {
        auto it = positions_.find(std::string(chunk_id));
        if (it == positions_.end()) {
            throw Error(ErrorKind::invalid_argument, std::string(chunk_id), "unknown chunk id");
        }
        return chunks_[it->second];
    }

    bool contains(std::string_view chunk_id) const {
        return positions_.count(std::string(chunk_id)) > 0;
    }

    /**
     * The min(k, size()) highest dot-product scores, descending, ties broken
     * by insertion order. Equivalent to sorting every entry.
     */
    std::vector<ScoredChunk> top_k(const EmbeddingVector& query, std::size_t k) const {
        if (k == 0) throw Error(ErrorKind::invalid_argument, "top_k", "k must be positive");
        if (query.dimension() != dimension_) {
            throw Error(ErrorKind::dimension_mismatch, "top_k",
                        "query has " + std::to_string(query.dimension()) + ", index has " +
                            std::to_string(dimension_));
        }
        const std::size_t n = chunks_.size();
        const std::size_t take = std::min(k, n);
        struct Hit {
            double score;
            std::size_t pos;
        };
        // "better" ordering: higher score first, then earlier position.
        auto better = [](const Hit& a, const Hit& b) {
            return a.score > b.score || (a.score == b.score && a.pos < b.pos);
        };
        std::vector<Hit> heap; // min-heap on `better`: front is the worst kept hit
        heap.reserve(take + 1);
        for (std::size_t i = 0; i < n; ++i) {
            const Hit hit{query.norm_flag ? dot(query.values, vector(i)) : 0.0, i};
            if (heap.size() < take) {
                heap.push_back(hit);
                std::push_heap(heap.begin(), heap.end(), better);
            } else if (take > 0 && better(hit, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), better);
                heap.back() = hit;
                std::push_heap(heap.begin(), heap.end(), better);
            }
        }
        std::sort_heap(heap.begin(), heap.end(), better);
        std::vector<ScoredChunk> out;
        out.reserve(heap.size());
        for (const auto& h : heap) out.push_back({chunks_[h.pos].chunk_id, h.score});
        return out;
    }

    /// Writes `<base>.json` (chunks and config) and `<base>.bin` (header + float32 rows).
    void save(const std::filesystem::path& base, const nlohmann::ordered_json& config = {}) const {
        nlohmann::ordered_json sidecar;
        sidecar["format"] = "kgrag-index";
        sidecar["version"] = 1;
        sidecar["dimension"] = dimension_;
        sidecar["count"] = chunks_.size();
        sidecar["config"] = config.is_null() ? nlohmann::ordered_json::object() : config;
        auto& arr = sidecar["chunks"] = nlohmann::ordered_json::array();
        for (const auto& c : chunks_) {
            arr.push_back({{"chunk_id", c.chunk_id},
                           {"text", c.text},
                           {"kind", to_string(c.kind)},
                           {"provenance", c.provenance},
                           {"offset", c.offset}});
        }
        write_file(with_suffix(base, ".json"), sidecar.dump(2) + "\n");

        std::string bin;
        bin.reserve(16 + data_.size() * 4);
        bin.append(kIndexMagic.data(), kIndexMagic.size());
        put_u32(bin, static_cast<std::uint32_t>(dimension_));
        put_u32(bin, static_cast<std::uint32_t>(chunks_.size()));
        for (float v : data_) put_u32(bin, std::bit_cast<std::uint32_t>(v));
        write_file(with_suffix(base, ".bin"), bin);
    }

    static VectorIndex load(const std::filesystem::path& base,
                            nlohmann::ordered_json* config = nullptr) {
        const auto json_path = with_suffix(base, ".json");
        const auto bin_path = with_suffix(base, ".bin");
        nlohmann::ordered_json sidecar;
        try {
            sidecar = nlohmann::ordered_json::parse(read_file(json_path));
        } catch (const nlohmann::ordered_json::parse_error& e) {
            throw Error(ErrorKind::malformed_json, json_path.string(), e.what());
        }
        const std::string bin = read_file(bin_path);
        if (bin.size() < 16 || !std::equal(kIndexMagic.begin(), kIndexMagic.end(), bin.begin())) {
            throw Error(ErrorKind::schema_violation, bin_path.string(), "bad index header");
        }
        const std::uint32_t dim = get_u32(bin, 8);
        const std::uint32_t count = get_u32(bin, 12);
        if (bin.size() != 16 + static_cast<std::size_t>(dim) * count * 4) {
            throw Error(ErrorKind::schema_violation, bin_path.string(), "truncated vector data");
        }

        std::vector<DocumentChunk> chunks;
        try {
            if (sidecar.at("dimension").get<std::size_t>() != dim ||
                sidecar.at("count").get<std::size_t>() != count) {
                throw Error(ErrorKind::schema_violation, json_path.string(),
                            "sidecar disagrees with binary header");
            }
            for (const auto& c : sidecar.at("chunks")) {
                chunks.push_back({c.at("chunk_id").get<std::string>(), c.at("text").get<std::string>(),
                                  parse_chunk_kind(c.at("kind").get<std::string>()),
                                  c.at("provenance").get<std::string>(),
                                  c.at("offset").get<std::size_t>()});
            }
        } catch (const nlohmann::ordered_json::exception& e) {
            throw Error(ErrorKind::schema_violation, json_path.string(), e.what());
        }
        if (chunks.size() != count) {
            throw Error(ErrorKind::schema_violation, json_path.string(), "chunk count mismatch");
        }
        if (config) *config = sidecar.value("config", nlohmann::ordered_json::object());

        VectorIndex index(dim);
        index.data_.resize(static_cast<std::size_t>(dim) * count);
        for (std::size_t i = 0; i < index.data_.size(); ++i) {
            index.data_[i] = std::bit_cast<float>(get_u32(bin, 16 + i * 4));
        }
        index.set_chunks(std::move(chunks));
        return index;
    }

    friend bool operator==(const VectorIndex& a, const VectorIndex& b) {
        return a.dimension_ == b.dimension_ && a.chunks_ == b.chunks_ && a.data_ == b.data_;
    }

private:
    void set_chunks(std::vector<DocumentChunk> chunks) {
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            if (!positions_.emplace(chunks[i].chunk_id, i).second) {
                throw Error(ErrorKind::duplicate_chunk_id, chunks[i].chunk_id, "duplicate chunk id");
            }
        }
        chunks_ = std::move(chunks);
    }

    static std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix) {
        return std::filesystem::path(base.string() + suffix);
    }

    static void put_u32(std::string& out, std::uint32_t v) {
        for (int shift = 0; shift < 32; shift += 8) out += static_cast<char>((v >> shift) & 0xFF);
    }

    static std::uint32_t get_u32(const std::string& in, std::size_t at) {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
        }
        return v;
    }

    std::size_t dimension_ = 0;
    std::vector<DocumentChunk> chunks_;
    std::unordered_map<std::string, std::size_t> positions_;
    std::vector<float> data_;
};

/// Embeds every chunk with `provider`; rejects duplicate ids before embedding.
inline VectorIndex build_index(std::vector<DocumentChunk> chunks, const EmbeddingProvider& provider) {
    {
        std::unordered_map<std::string_view, bool> seen;
        for (const auto& c : chunks) {
            if (!seen.emplace(c.chunk_id, true).second) {
                throw Error(ErrorKind::duplicate_chunk_id, c.chunk_id, "duplicate chunk id");
            }
        }
    }
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);
    const auto vectors = provider.embed_batch(texts);
    if (vectors.size() != chunks.size()) {
        throw Error(ErrorKind::protocol_error, provider.name(), "provider returned wrong vector count");
    }
    return VectorIndex(provider.dimension(), std::move(chunks), vectors);
}

} // namespace kgrag
