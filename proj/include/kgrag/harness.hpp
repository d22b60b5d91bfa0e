#pragma once

// Dual-mode evaluation over a QA set and the report files it produces.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgrag/dataset.hpp"
#include "kgrag/error.hpp"
#include "kgrag/io.hpp"
#include "kgrag/kg.hpp"
#include "kgrag/metrics.hpp"
#include "kgrag/pipeline.hpp"

namespace kgrag {

enum class ModeSelection { baseline, kg, both };

inline std::string_view to_string(ModeSelection s) {
    switch (s) {
    case ModeSelection::baseline: return "baseline";
    case ModeSelection::kg: return "kg";
    case ModeSelection::both: return "both";
    }
    return "both";
}

inline ModeSelection parse_mode_selection(std::string_view s) {
    if (s == "both") return ModeSelection::both;
    return parse_mode(s) == Mode::baseline ? ModeSelection::baseline : ModeSelection::kg;
}

inline std::vector<Mode> modes_of(ModeSelection s) {
    switch (s) {
    case ModeSelection::baseline: return {Mode::baseline};
    case ModeSelection::kg: return {Mode::kg};
    case ModeSelection::both: return {Mode::baseline, Mode::kg};
    }
    return {};
}

struct EvalConfig {
    PipelineConfig pipeline;
    ModeSelection modes = ModeSelection::both;
    std::size_t max_in_flight = 4;
    std::string model_parameters = "n/a";

    void validate() const {
        pipeline.validate();
        if (max_in_flight == 0) {
            throw Error(ErrorKind::invalid_argument, "max_in_flight", "must be positive");
        }
    }
};

inline void apply_eval_config(const nlohmann::json& obj, EvalConfig& cfg, const std::string& source) {
    apply_pipeline_config(obj, cfg.pipeline, source);
    if (obj.contains("mode")) {
        if (!obj["mode"].is_string()) {
            throw Error(ErrorKind::schema_violation, source + "#/mode", "expected a string");
        }
        cfg.modes = parse_mode_selection(obj["mode"].get<std::string>());
    }
    detail::read_if_present(obj, "max_in_flight", cfg.max_in_flight, source);
    detail::read_if_present(obj, "model_parameters", cfg.model_parameters, source);
}

inline EvalConfig load_eval_config(const std::filesystem::path& path) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::malformed_json, path.string(), e.what());
    }
    EvalConfig cfg;
    apply_eval_config(obj, cfg, path.string());
    return cfg;
}

struct QuestionResult {
    std::string qa_id;
    std::string question;
    std::string golden_answer;
    std::string answer;
    std::vector<ScoredChunk> retrieved;
    MetricRow metrics;
    std::string note; // set when generation failed and the row was zero-scored

    bool operator==(const QuestionResult&) const = default;
};

struct ModeReport {
    Mode mode = Mode::kg;
    std::vector<QuestionResult> questions; // sorted by qa_id
    MetricRow aggregate;
    double mean_latency_seconds = 0.0;

    bool operator==(const ModeReport&) const = default;
};

struct EvalReport {
    nlohmann::ordered_json config;
    std::vector<ModeReport> modes;

    const ModeReport* find(Mode mode) const {
        for (const auto& m : modes) {
            if (m.mode == mode) return &m;
        }
        return nullptr;
    }

    bool operator==(const EvalReport&) const = default;
};

/// Runs one mode over every QA pair with at most `max_in_flight` concurrent questions.
inline ModeReport evaluate_mode(const RetrievalQa& qa_pipeline, const std::vector<QAPair>& pairs,
                                const LlmClient& client, const EvalConfig& cfg) {
    ModeReport report;
    report.mode = qa_pipeline.config().mode;
    report.questions.resize(pairs.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < pairs.size();) {
            const QAPair& qa = pairs[i];
            QuestionResult& result = report.questions[i];
            result.qa_id = qa.id;
            result.question = qa.question;
            result.golden_answer = qa.golden_answer;
            try {
                Answer answer = qa_pipeline.answer(qa.question, client);
                result.answer = std::move(answer.text);
                result.retrieved = std::move(answer.retrieved);
                result.metrics =
                    score_answer(qa.id, result.answer, qa.golden_answer, answer.latency_seconds);
            } catch (const std::exception& e) {
                result.metrics = MetricRow{};
                result.metrics.qa_id = qa.id;
                result.note = e.what();
            }
        }
    };
    const std::size_t threads = std::min(cfg.max_in_flight, pairs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    std::sort(report.questions.begin(), report.questions.end(),
              [](const auto& a, const auto& b) { return a.qa_id < b.qa_id; });
    std::vector<MetricRow> rows;
    rows.reserve(report.questions.size());
    for (const auto& q : report.questions) rows.push_back(q.metrics);
    report.aggregate = aggregate(rows);
    report.mean_latency_seconds = report.aggregate.latency_seconds;
    return report;
}

/// Names recorded in the report's config snapshot.
struct RunInfo {
    std::string calendar;
    std::string conversations;
    std::string qa;
};

inline EvalReport evaluate(const EvalConfig& cfg, const Calendar& calendar,
                           const std::vector<ConversationMessage>& messages,
                           const std::vector<QAPair>& pairs,
                           std::shared_ptr<const EmbeddingProvider> provider, const LlmClient& client,
                           const TripleExtractor& extractor, const RunInfo& inputs = {}) {
    cfg.validate();
    if (pairs.empty()) {
        throw Error(ErrorKind::empty_input, inputs.qa, "no question/answer pairs");
    }

    EvalReport report;
    for (Mode mode : modes_of(cfg.modes)) {
        PipelineConfig pc = cfg.pipeline;
        pc.mode = mode;
        auto corpus = mode == Mode::baseline
                          ? build_baseline_corpus(calendar, messages, pc.chunking)
                          : build_kg_corpus(calendar, messages, extractor, pc.chunking);
        const RetrievalQa qa_pipeline(provider, std::move(corpus), pc);
        report.modes.push_back(evaluate_mode(qa_pipeline, pairs, client, cfg));
    }

    nlohmann::ordered_json snapshot = pipeline_config_to_json(cfg.pipeline);
    snapshot["mode"] = to_string(cfg.modes);
    snapshot["embedder"] = provider->name();
    snapshot["llm"] = client.name();
    snapshot["model_parameters"] = cfg.model_parameters;
    snapshot["max_in_flight"] = cfg.max_in_flight;
    snapshot["inputs"] = {{"calendar", inputs.calendar},
                          {"conversations", inputs.conversations},
                          {"qa", inputs.qa}};
    snapshot["questions"] = pairs.size();
    report.config = std::move(snapshot);
    return report;
}

/// Loads the three inputs and evaluates. An empty conversations path means no conversations.
inline EvalReport run_eval(const EvalConfig& cfg, const std::filesystem::path& calendar_path,
                           const std::filesystem::path& conversations_path,
                           const std::filesystem::path& qa_path,
                           std::shared_ptr<const EmbeddingProvider> provider, const LlmClient& client,
                           const TripleExtractor& extractor = LexiconExtractor{},
                           Diagnostics* warnings = nullptr) {
    const Calendar calendar = load_calendar(calendar_path, warnings);
    const auto messages = conversations_path.empty()
                              ? std::vector<ConversationMessage>{}
                              : load_conversations(conversations_path, warnings);
    const auto pairs = load_qa_pairs(qa_path, warnings);
    return evaluate(cfg, calendar, messages, pairs, std::move(provider), client, extractor,
                    {calendar_path.string(), conversations_path.string(), qa_path.string()});
}

// --- serialization ---------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json score_to_json(const ScoreTriple& s) {
    return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

inline ScoreTriple score_from_json(const nlohmann::ordered_json& j) {
    return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

inline nlohmann::ordered_json row_to_json(const MetricRow& r) {
    return {{"qa_id", r.qa_id},
            {"rouge1", score_to_json(r.rouge1)},
            {"rouge2", score_to_json(r.rouge2)},
            {"rougeL", score_to_json(r.rougeL)},
            {"bleu1", r.bleu1}};
}

inline MetricRow row_from_json(const nlohmann::ordered_json& j) {
    MetricRow r;
    r.qa_id = j.at("qa_id").get<std::string>();
    r.rouge1 = score_from_json(j.at("rouge1"));
    r.rouge2 = score_from_json(j.at("rouge2"));
    r.rougeL = score_from_json(j.at("rougeL"));
    r.bleu1 = j.at("bleu1").get<double>();
    return r;
}

template <typename Fn>
EvalReport parse_json_doc(std::string_view text, const std::string& source, Fn&& fill) {
    try {
        const auto doc = nlohmann::ordered_json::parse(text);
        return fill(doc);
    } catch (const nlohmann::ordered_json::parse_error& e) {
        throw Error(ErrorKind::malformed_json, source, e.what());
    } catch (const nlohmann::ordered_json::exception& e) {
        throw Error(ErrorKind::schema_violation, source, e.what());
    }
}

} // namespace detail

/**
 * Scores, answers and retrieval for every question. Wall-clock latencies are
 * left out so that offline runs serialize byte-identically; they live in
 * timing_to_json.
 */
inline nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json modes = nlohmann::ordered_json::array();
    for (const auto& m : report.modes) {
        nlohmann::ordered_json questions = nlohmann::ordered_json::array();
        for (const auto& q : m.questions) {
            nlohmann::ordered_json retrieved = nlohmann::ordered_json::array();
            for (const auto& r : q.retrieved) {
                retrieved.push_back({{"chunk_id", r.chunk_id}, {"score", r.score}});
            }
            questions.push_back({{"qa_id", q.qa_id},
                                 {"question", q.question},
                                 {"golden_answer", q.golden_answer},
                                 {"answer", q.answer},
                                 {"retrieved", std::move(retrieved)},
                                 {"metrics", detail::row_to_json(q.metrics)},
                                 {"note", q.note}});
        }
        modes.push_back({{"mode", to_string(m.mode)},
                         {"aggregate", detail::row_to_json(m.aggregate)},
                         {"questions", std::move(questions)}});
    }
    return {{"config", report.config}, {"modes", std::move(modes)}};
}

/// Per-question and mean latencies, keyed like report_to_json.
inline nlohmann::ordered_json timing_to_json(const EvalReport& report) {
    nlohmann::ordered_json modes = nlohmann::ordered_json::array();
    for (const auto& m : report.modes) {
        nlohmann::ordered_json questions = nlohmann::ordered_json::array();
        for (const auto& q : m.questions) {
            questions.push_back({{"qa_id", q.qa_id}, {"latency_seconds", q.metrics.latency_seconds}});
        }
        modes.push_back({{"mode", to_string(m.mode)},
                         {"mean_latency_seconds", m.mean_latency_seconds},
                         {"questions", std::move(questions)}});
    }
    return {{"llm", report.config.value("llm", "n/a")}, {"modes", std::move(modes)}};
}

inline std::string report_json(const EvalReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

inline std::string timing_json(const EvalReport& report) {
    return timing_to_json(report).dump(2) + "\n";
}

/// Inverse of report_json; latencies stay zero.
inline EvalReport parse_report(std::string_view text, const std::string& source = "report.json") {
    return detail::parse_json_doc(text, source, [](const nlohmann::ordered_json& doc) {
        EvalReport report;
        report.config = doc.at("config");
        for (const auto& m : doc.at("modes")) {
            ModeReport mode;
            mode.mode = parse_mode(m.at("mode").get<std::string>());
            mode.aggregate = detail::row_from_json(m.at("aggregate"));
            for (const auto& q : m.at("questions")) {
                QuestionResult r;
                r.qa_id = q.at("qa_id").get<std::string>();
                r.question = q.at("question").get<std::string>();
                r.golden_answer = q.at("golden_answer").get<std::string>();
                r.answer = q.at("answer").get<std::string>();
                for (const auto& s : q.at("retrieved")) {
                    r.retrieved.push_back({s.at("chunk_id").get<std::string>(), s.at("score").get<double>()});
                }
                r.metrics = detail::row_from_json(q.at("metrics"));
                r.note = q.at("note").get<std::string>();
                mode.questions.push_back(std::move(r));
            }
            report.modes.push_back(std::move(mode));
        }
        return report;
    });
}

/// Inverse of report_json plus timing_json.
inline EvalReport parse_report_with_timing(std::string_view report_text, std::string_view timing_text,
                               const std::string& source = "report.json",
                               const std::string& timing_source = "timing.json") {
    EvalReport report = parse_report(report_text, source);
    return detail::parse_json_doc(timing_text, timing_source, [&](const nlohmann::ordered_json& doc) {
        const auto& modes = doc.at("modes");
        if (modes.size() != report.modes.size()) {
            throw Error(ErrorKind::schema_violation, timing_source, "mode count differs from report");
        }
        for (std::size_t i = 0; i < modes.size(); ++i) {
            ModeReport& mode = report.modes[i];
            const auto& t = modes[i];
            const auto& questions = t.at("questions");
            if (parse_mode(t.at("mode").get<std::string>()) != mode.mode ||
                questions.size() != mode.questions.size()) {
                throw Error(ErrorKind::schema_violation, timing_source,
                            "mode " + std::string(to_string(mode.mode)) + " does not match report");
            }
            mode.mean_latency_seconds = t.at("mean_latency_seconds").get<double>();
            mode.aggregate.latency_seconds = mode.mean_latency_seconds;
            for (std::size_t j = 0; j < questions.size(); ++j) {
                if (questions[j].at("qa_id").get<std::string>() != mode.questions[j].qa_id) {
                    throw Error(ErrorKind::schema_violation, timing_source,
                                "question order differs from report at " + mode.questions[j].qa_id);
                }
                mode.questions[j].metrics.latency_seconds = questions[j].at("latency_seconds").get<double>();
            }
        }
        return report;
    });
}

inline EvalReport load_report(const std::filesystem::path& dir) {
    return parse_report_with_timing(read_file(dir / "report.json"), read_file(dir / "timing.json"),
                        (dir / "report.json").string(), (dir / "timing.json").string());
}

namespace detail {

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::string md_cell(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

inline std::string config_string(const nlohmann::ordered_json& config, const char* key) {
    if (!config.is_object() || !config.contains(key)) return "n/a";
    const auto& v = config[key];
    return v.is_string() ? v.get<std::string>() : v.dump();
}

} // namespace detail

/// Markdown summary: P/R/F1 per ROUGE variant, BLEU-1, latency, per-question rows.
inline std::string report_markdown(const EvalReport& report) {
    using detail::fixed;
    std::string md = "# Evaluation report\n\n";
    md += "- Embedder: " + detail::config_string(report.config, "embedder") + "\n";
    md += "- LLM: " + detail::config_string(report.config, "llm") + "\n";
    md += "- Top-k: " + detail::config_string(report.config, "k") + "\n";
    md += "- Questions: " + detail::config_string(report.config, "questions") + "\n\n";

    struct Variant {
        const char* title;
        ScoreTriple MetricRow::*field;
    };
    const Variant variants[] = {{"ROUGE-1", &MetricRow::rouge1},
                                {"ROUGE-2", &MetricRow::rouge2},
                                {"ROUGE-L", &MetricRow::rougeL}};
    for (const auto& v : variants) {
        md += std::string("## ") + v.title + "\n\n";
        md += "| Mode | Precision | Recall | F1 |\n|---|---:|---:|---:|\n";
        for (const auto& m : report.modes) {
            const ScoreTriple& s = m.aggregate.*(v.field);
            md += "| " + std::string(to_string(m.mode)) + " | " + fixed(s.precision, 3) + " | " +
                  fixed(s.recall, 3) + " | " + fixed(s.f1, 3) + " |\n";
        }
        md += "\n";
    }

    md += "## BLEU-1\n\n| Mode | BLEU-1 |\n|---|---:|\n";
    for (const auto& m : report.modes) {
        md += "| " + std::string(to_string(m.mode)) + " | " + fixed(m.aggregate.bleu1, 3) + " |\n";
    }
    md += "\n";

    auto latency = [&](Mode mode) {
        const ModeReport* m = report.find(mode);
        return m ? fixed(m->mean_latency_seconds, 4) : std::string("n/a");
    };
    md += "## Execution time (seconds)\n\n";
    md += "| LLM Model | Parameters | Baseline | KG |\n|---|---|---:|---:|\n";
    md += "| " + detail::md_cell(detail::config_string(report.config, "llm")) + " | " +
          detail::md_cell(detail::config_string(report.config, "model_parameters")) + " | " +
          latency(Mode::baseline) + " | " + latency(Mode::kg) + " |\n\n";

    md += "## Per question\n\n";
    md += "| QA id | Mode | ROUGE-1 F1 | ROUGE-2 F1 | ROUGE-L F1 | BLEU-1 | Latency (s) | Note |\n";
    md += "|---|---|---:|---:|---:|---:|---:|---|\n";
    for (const auto& m : report.modes) {
        for (const auto& q : m.questions) {
            md += "| " + detail::md_cell(q.qa_id) + " | " + std::string(to_string(m.mode)) + " | " +
                  fixed(q.metrics.rouge1.f1, 3) + " | " + fixed(q.metrics.rouge2.f1, 3) + " | " +
                  fixed(q.metrics.rougeL.f1, 3) + " | " + fixed(q.metrics.bleu1, 3) + " | " +
                  fixed(q.metrics.latency_seconds, 4) + " | " + detail::md_cell(q.note) + " |\n";
        }
    }
    return md;
}

/// Writes report.json, timing.json and report.md into `dir`, creating it if needed.
inline void emit_report(const EvalReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io_error, dir.string(), ec.message());
    write_file(dir / "report.json", report_json(report));
    write_file(dir / "timing.json", timing_json(report));
    write_file(dir / "report.md", report_markdown(report));
}

} // namespace kgrag
