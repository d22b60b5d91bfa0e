#pragma once

// The two compared retrieval-QA configurations: retrieval over raw text
// (baseline) and over linearized knowledge-graph triples (kg).

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgrag/dataset.hpp"
#include "kgrag/embed.hpp"
#include "kgrag/error.hpp"
#include "kgrag/index.hpp"
#include "kgrag/kg.hpp"
#include "kgrag/llm.hpp"

namespace kgrag {

enum class Mode { baseline, kg };

inline std::string_view to_string(Mode mode) { return mode == Mode::baseline ? "baseline" : "kg"; }

inline Mode parse_mode(std::string_view s) {
    if (s == "baseline") return Mode::baseline;
    if (s == "kg") return Mode::kg;
    throw Error(ErrorKind::invalid_argument, "mode", "unknown mode \"" + std::string(s) + "\"");
}

inline ChunkKind chunk_kind_for(Mode mode) {
    return mode == Mode::baseline ? ChunkKind::raw : ChunkKind::kg;
}

struct PipelineConfig {
    Mode mode = Mode::kg;
    std::size_t k = 3;
    PromptTemplate prompt;
    GenerationParams params;
    ChunkingParams chunking;

    void validate() const {
        if (k == 0) throw Error(ErrorKind::invalid_argument, "k", "must be positive");
        params.validate();
        chunking.validate();
    }

    bool operator==(const PipelineConfig&) const = default;
};

struct Answer {
    std::string text;
    std::vector<ScoredChunk> retrieved;
    std::string context;
    double latency_seconds = 0.0;
};

/// One document per month: "<title> on <date> from <time>." per event.
inline std::vector<SourceDocument> calendar_documents(const Calendar& cal) {
    std::vector<SourceDocument> docs;
    for (const auto& group : cal.months) {
        std::string text;
        for (const auto& ev : group.events) {
            if (!text.empty()) text += '\n';
            text += ev.title + " on " + ev.date + " from " + ev.time + ".";
        }
        if (!text.empty()) docs.push_back({std::move(text), group.month});
    }
    return docs;
}

/// One document per conversation: "<sender>: <text>" per message.
inline std::vector<SourceDocument> conversation_documents(
    const std::vector<ConversationMessage>& messages) {
    std::vector<SourceDocument> docs;
    for (const auto& msg : messages) {
        if (docs.empty() || docs.back().provenance != msg.conversation_id) {
            docs.push_back({{}, msg.conversation_id});
        } else {
            docs.back().text += '\n';
        }
        docs.back().text += msg.sender + ": " + msg.text;
    }
    return docs;
}

inline std::vector<DocumentChunk> build_baseline_corpus(const Calendar& cal,
                                                        const std::vector<ConversationMessage>& messages,
                                                        const ChunkingParams& chunking = {}) {
    auto docs = calendar_documents(cal);
    auto conv = conversation_documents(messages);
    docs.insert(docs.end(), std::make_move_iterator(conv.begin()), std::make_move_iterator(conv.end()));
    return chunk_documents(docs, chunking, ChunkKind::raw);
}

inline KnowledgeGraph build_knowledge_graph(const Calendar& cal,
                                            const std::vector<ConversationMessage>& messages,
                                            const TripleExtractor& extractor) {
    return merge(KnowledgeGraph(calendar_to_triples(cal)),
                 KnowledgeGraph(conversation_to_triples(messages, extractor)));
}

/**
 * One chunk per linearized triple, id "<provenance>#<n>" with n counting
 * triples per provenance. A line longer than max_chars is split further
 * and its pieces get ids "<provenance>#<n>.<j>".
 */
inline std::vector<DocumentChunk> kg_corpus_from_graph(const KnowledgeGraph& graph,
                                                       const ChunkingParams& chunking = {}) {
    chunking.validate();
    std::vector<DocumentChunk> chunks;
    std::map<std::string, std::size_t> per_provenance;
    for (auto& line : linearize(graph)) {
        const std::string id = line.provenance + "#" + std::to_string(per_provenance[line.provenance]++);
        if (line.text.size() <= chunking.max_chars) {
            chunks.push_back({id, std::move(line.text), ChunkKind::kg, line.provenance, 0});
            continue;
        }
        const SourceDocument doc{std::move(line.text), id};
        for (auto& piece : chunk_documents(std::span(&doc, 1), chunking, ChunkKind::kg)) {
            piece.chunk_id = id + "." + piece.chunk_id.substr(id.size() + 1);
            piece.provenance = line.provenance;
            chunks.push_back(std::move(piece));
        }
    }
    return chunks;
}

inline std::vector<DocumentChunk> build_kg_corpus(const Calendar& cal,
                                                  const std::vector<ConversationMessage>& messages,
                                                  const TripleExtractor& extractor,
                                                  const ChunkingParams& chunking = {}) {
    return kg_corpus_from_graph(build_knowledge_graph(cal, messages, extractor), chunking);
}

/**
 * Retriever plus generator for one mode. The index is built with, and
 * queried through, the same provider instance.
 */
class RetrievalQa {
public:
    RetrievalQa(std::shared_ptr<const EmbeddingProvider> provider, std::vector<DocumentChunk> corpus,
                PipelineConfig config)
        : provider_(std::move(provider)), config_(std::move(config)) {
        config_.validate();
        const ChunkKind expected = chunk_kind_for(config_.mode);
        for (const auto& c : corpus) {
            if (c.kind != expected) {
                throw Error(ErrorKind::invalid_argument, c.chunk_id,
                            "chunk kind does not match pipeline mode " +
                                std::string(to_string(config_.mode)));
            }
        }
        index_ = build_index(std::move(corpus), *provider_);
    }

    /// Wraps an index that was built (and possibly persisted) with `provider`.
    RetrievalQa(std::shared_ptr<const EmbeddingProvider> provider, VectorIndex index,
                PipelineConfig config)
        : provider_(std::move(provider)), config_(std::move(config)), index_(std::move(index)) {
        config_.validate();
    }

    const VectorIndex& index() const noexcept { return index_; }
    const PipelineConfig& config() const noexcept { return config_; }

    /// Top-k chunk texts in rank order, newline separated.
    std::string assemble_context(const std::vector<ScoredChunk>& retrieved) const {
        std::string context;
        for (std::size_t i = 0; i < retrieved.size(); ++i) {
            if (i > 0) context += '\n';
            context += index_.chunk(retrieved[i].chunk_id).text;
        }
        return context;
    }

    Answer answer(std::string_view query, const LlmClient& client) const {
        using clock = std::chrono::steady_clock;
        const auto started = clock::now();
        Answer out;

        EmbeddingVector query_vector;
        try {
            query_vector = provider_->embed(std::string(query));
        } catch (const Error& e) {
            throw e.with_context("embed stage");
        }
        try {
            out.retrieved = index_.empty() ? std::vector<ScoredChunk>{}
                                           : index_.top_k(query_vector, config_.k);
        } catch (const Error& e) {
            throw e.with_context("retrieval stage");
        }
        out.context = assemble_context(out.retrieved);
        const std::string prompt = render_prompt(config_.prompt, out.context, query);
        try {
            out.text = client.generate(prompt, config_.params);
        } catch (const Error& e) {
            throw e.with_context("generation stage");
        }
        out.latency_seconds = std::chrono::duration<double>(clock::now() - started).count();
        return out;
    }

private:
    std::shared_ptr<const EmbeddingProvider> provider_;
    PipelineConfig config_;
    VectorIndex index_;
};

namespace detail {

template <typename T>
void read_if_present(const nlohmann::json& obj, const char* key, T& out, const std::string& source) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::schema_violation, source + "#/" + key, e.what());
    }
}

} // namespace detail

/**
 * Applies the pipeline keys of a JSON config object onto `cfg`:
 * mode, k, template, params{max_tokens,temperature,repetition_penalty,seed},
 * chunking{max_chars,overlap_chars}. "mode" may also be "both", which is
 * left for the caller to interpret.
 */
inline void apply_pipeline_config(const nlohmann::json& obj, PipelineConfig& cfg,
                                  const std::string& source) {
    if (!obj.is_object()) {
        throw Error(ErrorKind::schema_violation, source, "config must be a JSON object");
    }
    if (obj.contains("mode") && obj["mode"].is_string() && obj["mode"] != "both") {
        cfg.mode = parse_mode(obj["mode"].get<std::string>());
    }
    detail::read_if_present(obj, "k", cfg.k, source);
    if (obj.contains("template")) {
        std::string text;
        detail::read_if_present(obj, "template", text, source);
        cfg.prompt = PromptTemplate(std::move(text));
    }
    if (obj.contains("params")) {
        const auto& p = obj["params"];
        detail::read_if_present(p, "max_tokens", cfg.params.max_tokens, source);
        detail::read_if_present(p, "temperature", cfg.params.temperature, source);
        detail::read_if_present(p, "repetition_penalty", cfg.params.repetition_penalty, source);
        if (p.contains("seed") && !p["seed"].is_null()) {
            std::int64_t seed = 0;
            detail::read_if_present(p, "seed", seed, source);
            cfg.params.seed = seed;
        }
    }
    if (obj.contains("chunking")) {
        const auto& c = obj["chunking"];
        detail::read_if_present(c, "max_chars", cfg.chunking.max_chars, source);
        detail::read_if_present(c, "overlap_chars", cfg.chunking.overlap_chars, source);
    }
}

inline nlohmann::ordered_json pipeline_config_to_json(const PipelineConfig& cfg) {
    nlohmann::ordered_json params = {{"max_tokens", cfg.params.max_tokens},
                                     {"temperature", cfg.params.temperature},
                                     {"repetition_penalty", cfg.params.repetition_penalty}};
    params["seed"] = cfg.params.seed ? nlohmann::ordered_json(*cfg.params.seed) : nlohmann::ordered_json(nullptr);
    return {{"mode", to_string(cfg.mode)},
            {"k", cfg.k},
            {"template", cfg.prompt.text()},
            {"params", std::move(params)},
            {"chunking",
             {{"max_chars", cfg.chunking.max_chars}, {"overlap_chars", cfg.chunking.overlap_chars}}}};
}

} // namespace kgrag
