#pragma once

// ROUGE-1/2/L and BLEU against a single golden reference.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgrag/error.hpp"

namespace kgrag {

inline bool is_token_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

/// Lowercased ASCII alphanumeric runs; everything else separates tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (is_token_char(c)) {
            current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

struct ScoreTriple {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    static ScoreTriple from(double precision, double recall) {
        const double sum = precision + recall;
        return {precision, recall, sum > 0.0 ? 2.0 * precision * recall / sum : 0.0};
    }

    bool operator==(const ScoreTriple&) const = default;
};

struct MetricRow {
    std::string qa_id;
    ScoreTriple rouge1;
    ScoreTriple rouge2;
    ScoreTriple rougeL;
    double bleu1 = 0.0;
    double latency_seconds = 0.0;

    bool operator==(const MetricRow&) const = default;
};

namespace detail {

// Tokens never contain spaces, so a space-joined key is unambiguous.
inline std::map<std::string, std::size_t> ngram_counts(std::span<const std::string> tokens,
                                                      std::size_t n) {
    std::map<std::string, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
            key += ' ';
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

inline std::size_t clipped_overlap(const std::map<std::string, std::size_t>& candidate,
                                   const std::map<std::string, std::size_t>& reference) {
    std::size_t overlap = 0;
    for (const auto& [gram, count] : candidate) {
        auto it = reference.find(gram);
        if (it != reference.end()) overlap += std::min(count, it->second);
    }
    return overlap;
}

inline double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline std::size_t ngram_total(std::size_t tokens, std::size_t n) {
    return tokens >= n ? tokens - n + 1 : 0;
}

} // namespace detail

/// Clipped unigram overlap between two token lists.
inline std::size_t unigram_overlap(std::span<const std::string> a, std::span<const std::string> b) {
    return detail::clipped_overlap(detail::ngram_counts(a, 1), detail::ngram_counts(b, 1));
}

inline ScoreTriple rouge_n(std::span<const std::string> candidate,
                           std::span<const std::string> reference, int n) {
    if (n != 1 && n != 2) {
        throw Error(ErrorKind::invalid_n, "rouge_n", "n must be 1 or 2, got " + std::to_string(n));
    }
    const auto order = static_cast<std::size_t>(n);
    const std::size_t overlap = detail::clipped_overlap(detail::ngram_counts(candidate, order),
                                                        detail::ngram_counts(reference, order));
    return ScoreTriple::from(
        detail::ratio(overlap, detail::ngram_total(candidate.size(), order)),
        detail::ratio(overlap, detail::ngram_total(reference.size(), order)));
}

inline ScoreTriple rouge_n(std::string_view candidate, std::string_view reference, int n) {
    const auto c = tokenize(candidate);
    const auto r = tokenize(reference);
    return rouge_n(c, r, n);
}

/// Length of the longest common subsequence, two-row DP.
inline std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> curr(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

inline ScoreTriple rouge_l(std::span<const std::string> candidate,
                           std::span<const std::string> reference) {
    const std::size_t lcs = lcs_length(candidate, reference);
    return ScoreTriple::from(detail::ratio(lcs, candidate.size()),
                             detail::ratio(lcs, reference.size()));
}

inline ScoreTriple rouge_l(std::string_view candidate, std::string_view reference) {
    const auto c = tokenize(candidate);
    const auto r = tokenize(reference);
    return rouge_l(c, r);
}

/**
 * Sentence BLEU with uniform weights over n = 1..max_n, clipped precisions
 * and the standard brevity penalty. Unsmoothed: any zero precision, or an
 * empty candidate, gives 0.
 */
inline double bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                   int max_n) {
    if (max_n < 1 || max_n > 4) {
        throw Error(ErrorKind::invalid_n, "bleu", "max_n must be in 1..4, got " + std::to_string(max_n));
    }
    if (candidate.empty()) return 0.0;
    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        const auto order = static_cast<std::size_t>(n);
        const std::size_t total = detail::ngram_total(candidate.size(), order);
        const std::size_t clipped = detail::clipped_overlap(
            detail::ngram_counts(candidate, order), detail::ngram_counts(reference, order));
        if (total == 0 || clipped == 0) return 0.0;
        log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
    }
    const double c = static_cast<double>(candidate.size());
    const double r = static_cast<double>(reference.size());
    const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
    return brevity * std::exp(log_sum / max_n);
}

inline double bleu(std::string_view candidate, std::string_view reference, int max_n) {
    const auto c = tokenize(candidate);
    const auto r = tokenize(reference);
    return bleu(c, r, max_n);
}

inline MetricRow score_answer(std::string qa_id, std::string_view candidate,
                              std::string_view reference, double latency_seconds) {
    const auto c = tokenize(candidate);
    const auto r = tokenize(reference);
    MetricRow row;
    row.qa_id = std::move(qa_id);
    row.rouge1 = rouge_n(c, r, 1);
    row.rouge2 = rouge_n(c, r, 2);
    row.rougeL = rouge_l(c, r);
    row.bleu1 = bleu(c, r, 1);
    row.latency_seconds = latency_seconds;
    return row;
}

/// Column-wise arithmetic mean, labelled "MEAN".
inline MetricRow aggregate(std::span<const MetricRow> rows) {
    if (rows.empty()) {
        throw Error(ErrorKind::empty_input, "aggregate", "no metric rows");
    }
    MetricRow mean;
    mean.qa_id = "MEAN";
    auto add = [](ScoreTriple& acc, const ScoreTriple& s) {
        acc.precision += s.precision;
        acc.recall += s.recall;
        acc.f1 += s.f1;
    };
    for (const auto& row : rows) {
        add(mean.rouge1, row.rouge1);
        add(mean.rouge2, row.rouge2);
        add(mean.rougeL, row.rougeL);
        mean.bleu1 += row.bleu1;
        mean.latency_seconds += row.latency_seconds;
    }
    const double n = static_cast<double>(rows.size());
    for (ScoreTriple* s : {&mean.rouge1, &mean.rouge2, &mean.rougeL}) {
        s->precision /= n;
        s->recall /= n;
        s->f1 /= n;
    }
    mean.bleu1 /= n;
    mean.latency_seconds /= n;
    return mean;
}

} // namespace kgrag
