#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <tuple>
#include <string>
#include <string_view>
#include <vector>

#include "kgrag/error.hpp"
#include "kgrag/kg.hpp"
#include "kgrag/metrics.hpp"

namespace kgrag {

struct GenerationParams {
    int max_tokens = 128;
    double temperature = 0.0; // 0 requests greedy decoding
    double repetition_penalty = 1.1;
    std::optional<std::int64_t> seed;

    void validate() const {
        if (max_tokens <= 0) {
            throw Error(ErrorKind::invalid_argument, "params.max_tokens", "must be positive");
        }
        if (!(temperature >= 0.0)) {
            throw Error(ErrorKind::invalid_argument, "params.temperature", "must be >= 0");
        }
        if (!(repetition_penalty >= 1.0)) {
            throw Error(ErrorKind::invalid_argument, "params.repetition_penalty", "must be >= 1");
        }
    }

    bool operator==(const GenerationParams&) const = default;
};

inline constexpr std::string_view kContextPlaceholder = "<context>";
inline constexpr std::string_view kQueryPlaceholder = "<query>";

inline constexpr std::string_view kDefaultTemplate =
    "Retrieve the answer from the knowledge graph <context> and generate a concise response "
    "to the <query>";

/// Prompt text with exactly one "<context>" and one "<query>".
class PromptTemplate {
public:
    PromptTemplate() : PromptTemplate(std::string(kDefaultTemplate)) {}

    explicit PromptTemplate(std::string text) : text_(std::move(text)) {
        context_pos_ = find_once(kContextPlaceholder);
        query_pos_ = find_once(kQueryPlaceholder);
    }

    const std::string& text() const noexcept { return text_; }
    std::size_t context_pos() const noexcept { return context_pos_; }
    std::size_t query_pos() const noexcept { return query_pos_; }
    bool context_first() const noexcept { return context_pos_ < query_pos_; }

    std::string render(std::string_view context, std::string_view query) const {
        const auto [first_pos, first_len, first_val, second_pos, second_len, second_val] =
            context_first()
                ? std::tuple{context_pos_, kContextPlaceholder.size(), context, query_pos_,
                             kQueryPlaceholder.size(), query}
                : std::tuple{query_pos_, kQueryPlaceholder.size(), query, context_pos_,
                             kContextPlaceholder.size(), context};
        std::string out;
        out.reserve(text_.size() + context.size() + query.size());
        out.append(text_, 0, first_pos);
        out.append(first_val);
        out.append(text_, first_pos + first_len, second_pos - first_pos - first_len);
        out.append(second_val);
        out.append(text_, second_pos + second_len);
        return out;
    }

    bool operator==(const PromptTemplate& other) const { return text_ == other.text_; }

private:
    std::size_t find_once(std::string_view placeholder) const {
        const auto pos = text_.find(placeholder);
        if (pos == std::string::npos ||
            text_.find(placeholder, pos + placeholder.size()) != std::string::npos) {
            throw Error(ErrorKind::missing_placeholder, "template",
                        "\"" + std::string(placeholder) + "\" must appear exactly once");
        }
        return pos;
    }

    std::string text_;
    std::size_t context_pos_ = 0;
    std::size_t query_pos_ = 0;
};

inline std::string render_prompt(const PromptTemplate& t, std::string_view context,
                                 std::string_view query) {
    return t.render(context, query);
}

/// Text generation backend. Must tolerate concurrent generate() calls.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string generate(const std::string& prompt, const GenerationParams& params) const = 0;
    virtual std::string name() const = 0;
};

/// Removes a verbatim echo of the prompt from the front of a completion.
inline std::string strip_echo(std::string_view prompt, std::string answer) {
    if (!prompt.empty() && std::string_view(answer).starts_with(prompt)) {
        answer.erase(0, prompt.size());
    }
    return answer;
}

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline constexpr std::string_view kDontKnow = "I don't know.";

/**
 * Offline stand-in for an LLM. Recovers the context and query from a prompt
 * rendered with `tmpl`, then answers with the context sentence that has the
 * largest clipped unigram overlap with the query (earliest on ties).
 */
class ExtractiveMockClient final : public LlmClient {
public:
    explicit ExtractiveMockClient(PromptTemplate tmpl = {}) : template_(std::move(tmpl)) {}

    std::string name() const override { return "extractive-mock"; }

    std::string generate(const std::string& prompt, const GenerationParams&) const override {
        const auto parts = split_prompt(prompt);
        if (!parts) return std::string(kDontKnow);
        return answer_from(parts->context, parts->query);
    }

    static std::string answer_from(std::string_view context, std::string_view query) {
        const auto query_tokens = tokenize(query);
        std::string_view best;
        std::size_t best_overlap = 0;
        bool found = false;
        for (auto sentence : split_sentences(context)) {
            const auto tokens = tokenize(sentence);
            const std::size_t overlap = unigram_overlap(tokens, query_tokens);
            if (!found || overlap > best_overlap) {
                best = sentence;
                best_overlap = overlap;
                found = true;
            }
        }
        return found ? std::string(best) : std::string(kDontKnow);
    }

    struct PromptParts {
        std::string_view context;
        std::string_view query;
    };

    /// Inverse of PromptTemplate::render; nullopt when the prompt does not fit the template.
    std::optional<PromptParts> split_prompt(std::string_view prompt) const {
        const std::string& t = template_.text();
        const bool context_first = template_.context_first();
        const std::size_t first_pos = context_first ? template_.context_pos() : template_.query_pos();
        const std::size_t second_pos = context_first ? template_.query_pos() : template_.context_pos();
        const std::size_t first_len =
            context_first ? kContextPlaceholder.size() : kQueryPlaceholder.size();
        const std::size_t second_len =
            context_first ? kQueryPlaceholder.size() : kContextPlaceholder.size();

        const std::string_view head = std::string_view(t).substr(0, first_pos);
        const std::string_view middle =
            std::string_view(t).substr(first_pos + first_len, second_pos - first_pos - first_len);
        const std::string_view tail = std::string_view(t).substr(second_pos + second_len);

        if (prompt.size() < head.size() + middle.size() + tail.size() ||
            !prompt.starts_with(head) || !prompt.ends_with(tail)) {
            return std::nullopt;
        }
        const std::string_view inner =
            prompt.substr(head.size(), prompt.size() - head.size() - tail.size());
        // The retrieved context is the long, uncontrolled part, so search for
        // the separator from the side of the query.
        const std::size_t sep = context_first ? inner.rfind(middle) : inner.find(middle);
        if (sep == std::string_view::npos) return std::nullopt;
        const std::string_view first = inner.substr(0, sep);
        const std::string_view second = inner.substr(sep + middle.size());
        return context_first ? PromptParts{first, second} : PromptParts{second, first};
    }

private:
    PromptTemplate template_;
};

} // namespace kgrag
