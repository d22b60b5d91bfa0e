#pragma once

// Personal knowledge graph: triple builders for calendar and conversation
// data, linearization for embedding, DOT and TSV export.

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "kgrag/dataset.hpp"
#include "kgrag/error.hpp"
#include "kgrag/verb_lexicon.hpp"

namespace kgrag {

struct Triple {
    std::string source;
    std::string relation;
    std::string target;
    std::string provenance; // calendar month key, or "<conversation_id>:<seq>"

    bool operator==(const Triple&) const = default;
};

inline constexpr std::string_view kHasEvent = "has event";
inline constexpr std::string_view kDateRelation = "date";
inline constexpr std::string_view kTimeRelation = "time";
inline constexpr std::string_view kSaidIn = "said in";

/**
 * Ordered set of triples keyed on (source, relation, target). The first
 * occurrence wins, so provenance of a duplicate is the earliest one seen.
 */
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    explicit KnowledgeGraph(const std::vector<Triple>& triples) {
        for (const auto& t : triples) add(t);
    }

    /// Returns false when the triple was already present.
    bool add(Triple t) {
        if (t.source.empty() || t.relation.empty() || t.target.empty()) {
            throw Error(ErrorKind::invalid_argument, t.provenance, "triple with an empty label");
        }
        if (!keys_.emplace(t.source, t.relation, t.target).second) return false;
        nodes_.insert(t.source);
        nodes_.insert(t.target);
        triples_.push_back(std::move(t));
        return true;
    }

    bool contains(std::string_view source, std::string_view relation,
                  std::string_view target) const {
        return keys_.count({std::string(source), std::string(relation), std::string(target)}) > 0;
    }

    const std::vector<Triple>& triples() const noexcept { return triples_; }
    const std::set<std::string>& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return triples_.size(); }
    bool empty() const noexcept { return triples_.empty(); }

    friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
        return a.triples_ == b.triples_;
    }

private:
    std::vector<Triple> triples_;
    std::set<std::tuple<std::string, std::string, std::string>> keys_;
    std::set<std::string> nodes_;
};

/// Label of an event node: title disambiguated by date.
inline std::string event_node_label(const CalendarEvent& ev) {
    return ev.title + " on " + ev.date;
}

inline std::vector<Triple> calendar_to_triples(const Calendar& cal) {
    std::vector<Triple> out;
    out.reserve(cal.event_count() * 3);
    for (const auto& group : cal.months) {
        for (const auto& ev : group.events) {
            const std::string label = event_node_label(ev);
            out.push_back({cal.owner, std::string(kHasEvent), label, group.month});
            out.push_back({label, std::string(kDateRelation), ev.date, group.month});
            out.push_back({label, std::string(kTimeRelation), ev.time, group.month});
        }
    }
    return out;
}

/// Pluggable subject-verb-object extraction.
class TripleExtractor {
public:
    virtual ~TripleExtractor() = default;
    virtual std::vector<Triple> extract(std::string_view sentence,
                                        std::string_view provenance) const = 0;
};

/**
 * First-verb SVO: the first token whose (de-inflected) lowercase form is in
 * the verb lexicon becomes the relation, tokens before it the source and
 * tokens after it the target. The relation keeps its surface form.
 */
class LexiconExtractor final : public TripleExtractor {
public:
    LexiconExtractor() : verbs_(&default_verb_lexicon()) {}
    explicit LexiconExtractor(const std::unordered_set<std::string_view>& verbs) : verbs_(&verbs) {}

    std::vector<Triple> extract(std::string_view sentence,
                                std::string_view provenance) const override {
        const auto tokens = split_words(sentence);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!is_verb(tokens[i])) continue;
            if (i == 0 || i + 1 == tokens.size()) return {};
            return {{join(tokens, 0, i), tokens[i], join(tokens, i + 1, tokens.size()),
                     std::string(provenance)}};
        }
        return {};
    }

    bool is_verb(std::string_view word) const {
        std::string lower;
        lower.reserve(word.size());
        for (char c : word) lower += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
        for (const auto& candidate : stems(lower)) {
            if (verbs_->count(candidate)) return true;
        }
        return false;
    }

    /// Whitespace-separated words with surrounding punctuation stripped.
    static std::vector<std::string> split_words(std::string_view sentence) {
        std::vector<std::string> words;
        std::size_t i = 0;
        while (i < sentence.size()) {
            while (i < sentence.size() && is_space(sentence[i])) ++i;
            std::size_t j = i;
            while (j < sentence.size() && !is_space(sentence[j])) ++j;
            std::string_view word = sentence.substr(i, j - i);
            while (!word.empty() && is_edge_punct(word.front())) word.remove_prefix(1);
            while (!word.empty() && is_edge_punct(word.back())) word.remove_suffix(1);
            if (!word.empty()) words.emplace_back(word);
            i = j;
        }
        return words;
    }

private:
    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

    static bool is_edge_punct(char c) {
        const auto u = static_cast<unsigned char>(c);
        return u < 0x80 && !((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                             (c >= '0' && c <= '9'));
    }

    static std::string join(const std::vector<std::string>& words, std::size_t from,
                            std::size_t to) {
        std::string out;
        for (std::size_t k = from; k < to; ++k) {
            if (k > from) out += ' ';
            out += words[k];
        }
        return out;
    }

    static bool ends_with(std::string_view s, std::string_view suffix) {
        return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
    }

    // Lookup candidates for a lowercase word: itself plus -s/-ed/-ing reductions.
    static std::vector<std::string> stems(const std::string& w) {
        std::vector<std::string> out{w};
        auto push = [&](std::string s) {
            if (s.size() >= 2) out.push_back(std::move(s));
        };
        auto drop = [&](std::size_t n) { return w.substr(0, w.size() - n); };
        auto doubled = [&](std::size_t n) {
            return w.size() > n + 1 && w[w.size() - n - 1] == w[w.size() - n - 2];
        };
        if (ends_with(w, "ies")) push(drop(3) + "y");
        if (ends_with(w, "es")) push(drop(2));
        if (ends_with(w, "s") && !ends_with(w, "ss")) push(drop(1));
        if (ends_with(w, "ied")) push(drop(3) + "y");
        if (ends_with(w, "ed")) {
            push(drop(2));
            push(drop(1));
            if (doubled(2)) push(drop(3));
        }
        if (ends_with(w, "ing")) {
            push(drop(3));
            push(drop(3) + "e");
            if (doubled(3)) push(drop(4));
        }
        return out;
    }

    const std::unordered_set<std::string_view>* verbs_;
};

inline std::vector<Triple> extract_svo(std::string_view sentence, const TripleExtractor& extractor,
                                       std::string_view provenance = {}) {
    if (sentence.empty()) return {};
    return extractor.extract(sentence, provenance);
}

/// Splits on '.', '!' and '?'; pieces are trimmed and empty ones dropped.
inline std::vector<std::string_view> split_sentences(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        std::string_view piece = text.substr(start, end - start);
        const auto first = piece.find_first_not_of(" \t\r\n");
        if (first != std::string_view::npos) {
            const auto last = piece.find_last_not_of(" \t\r\n");
            out.push_back(piece.substr(first, last - first + 1));
        }
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '.' || text[i] == '!' || text[i] == '?') {
            flush(i);
            start = i + 1;
        }
    }
    flush(text.size());
    return out;
}

inline std::vector<Triple> conversation_to_triples(const std::vector<ConversationMessage>& messages,
                                                   const TripleExtractor& extractor) {
    KnowledgeGraph graph;
    for (const auto& msg : messages) {
        const std::string provenance = msg.conversation_id + ":" + std::to_string(msg.seq);
        graph.add({msg.sender, std::string(kSaidIn), msg.conversation_id, provenance});
        for (auto sentence : split_sentences(msg.text)) {
            for (auto& t : extract_svo(sentence, extractor, provenance)) graph.add(std::move(t));
        }
    }
    return graph.triples();
}

/// Union keeping a's order, then b's triples not already in a.
inline KnowledgeGraph merge(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    KnowledgeGraph out = a;
    for (const auto& t : b.triples()) out.add(t);
    return out;
}

struct LinearizedTriple {
    std::string text;
    std::string provenance;

    bool operator==(const LinearizedTriple&) const = default;
};

inline std::string linearize(const Triple& t) {
    return t.source + " " + t.relation + " " + t.target + ".";
}

inline std::vector<LinearizedTriple> linearize(const KnowledgeGraph& g) {
    std::vector<LinearizedTriple> lines;
    lines.reserve(g.size());
    for (const auto& t : g.triples()) lines.push_back({linearize(t), t.provenance});
    return lines;
}

inline std::string dot_quote(std::string_view label) {
    std::string out = "\"";
    for (char c : label) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': break;
        default: out += c;
        }
    }
    out += '"';
    return out;
}

inline std::string export_dot(const KnowledgeGraph& g) {
    std::string out = "digraph kg {\n";
    for (const auto& t : g.triples()) {
        out += "  " + dot_quote(t.source) + " -> " + dot_quote(t.target) +
               " [label=" + dot_quote(t.relation) + "];\n";
    }
    out += "}\n";
    return out;
}

namespace detail {

inline std::string tsv_escape(std::string_view field) {
    std::string out;
    for (char c : field) {
        switch (c) {
        case '\t': out += "\\t"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\\': out += "\\\\"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string tsv_unescape(std::string_view field, const std::string& where) {
    std::string out;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field[i] != '\\') {
            out += field[i];
            continue;
        }
        if (++i == field.size()) throw Error(ErrorKind::schema_violation, where, "dangling escape");
        switch (field[i]) {
        case 't': out += '\t'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case '\\': out += '\\'; break;
        default: throw Error(ErrorKind::schema_violation, where, "unknown escape");
        }
    }
    return out;
}

} // namespace detail

/// source \t relation \t target \t provenance, one triple per line.
inline std::string triples_to_tsv(const std::vector<Triple>& triples) {
    std::string out;
    for (const auto& t : triples) {
        out += detail::tsv_escape(t.source) + '\t' + detail::tsv_escape(t.relation) + '\t' +
               detail::tsv_escape(t.target) + '\t' + detail::tsv_escape(t.provenance) + '\n';
    }
    return out;
}

inline std::vector<Triple> parse_triples_tsv(std::string_view text, const std::string& source) {
    std::vector<Triple> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t tab; (tab = line.find('\t', start)) != std::string_view::npos;
             start = tab + 1) {
            fields.push_back(detail::tsv_unescape(line.substr(start, tab - start), where));
        }
        fields.push_back(detail::tsv_unescape(line.substr(start), where));
        if (fields.size() != 4) {
            throw Error(ErrorKind::schema_violation, where,
                        "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
        }
        out.push_back({fields[0], fields[1], fields[2], fields[3]});
    }
    return out;
}

} // namespace kgrag
