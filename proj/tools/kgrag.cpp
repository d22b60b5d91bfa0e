// kgrag: build corpora and indices from personal data, ask questions, run
// the baseline-vs-kg evaluation and export the knowledge graph.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kgrag/http_llm.hpp"
#include "kgrag/kgrag.hpp"
#include "kgrag/remote_embedder.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

struct Options {
    std::string calendar;
    std::string conversations;
    std::string qa;
    std::string mode;
    std::size_t k = 0;
    std::string embedder = "hash";
    std::string llm = "mock";
    std::string config;
    std::string out;
    std::size_t max_chars = 0;
    std::size_t overlap = 0;
    std::string query;
};

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

std::string require_env(const char* name) {
    std::string v = env_or_empty(name);
    if (v.empty()) {
        throw kgrag::Error(kgrag::ErrorKind::invalid_argument, name, "environment variable is not set");
    }
    return v;
}

std::shared_ptr<const kgrag::EmbeddingProvider> make_embedder(const std::string& kind) {
    if (kind == "hash") return std::make_shared<kgrag::HashEmbedder>();
    return std::make_shared<kgrag::RemoteEmbedder>(require_env("KGRAG_EMBED_URL"),
                                                   env_or_empty("KGRAG_EMBED_TOKEN"));
}

std::unique_ptr<kgrag::LlmClient> make_llm(const std::string& kind, const kgrag::PromptTemplate& t) {
    if (kind == "mock") return std::make_unique<kgrag::ExtractiveMockClient>(t);
    return std::make_unique<kgrag::HttpLlmClient>(require_env("KGRAG_LLM_URL"),
                                                  env_or_empty("KGRAG_LLM_TOKEN"),
                                                  env_or_empty("KGRAG_LLM_MODEL"));
}

void print_warnings(const kgrag::Diagnostics& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w.location << ": " << w.message << "\n";
}

class Cli {
public:
    Cli() {
        app_.require_subcommand(1);
        app_.fallthrough();
        app_.add_option("--calendar", opt_.calendar, "Calendar JSON file");
        app_.add_option("--conversations", opt_.conversations, "Conversation log (JSONL)");
        app_.add_option("--qa", opt_.qa, "Question / golden answer pairs (JSON)");
        mode_ = app_.add_option("--mode", opt_.mode, "Retrieval mode")
                    ->check(CLI::IsMember({"baseline", "kg", "both"}));
        k_ = app_.add_option("--k", opt_.k, "Chunks retrieved per query")->check(CLI::PositiveNumber);
        app_.add_option("--embedder", opt_.embedder, "Embedding backend")
            ->check(CLI::IsMember({"hash", "remote"}));
        app_.add_option("--llm", opt_.llm, "Generation backend")->check(CLI::IsMember({"mock", "remote"}));
        app_.add_option("--config", opt_.config, "JSON config file; flags override its values");
        app_.add_option("--out", opt_.out, "Output directory");
        max_chars_ = app_.add_option("--max-chars", opt_.max_chars, "Chunk size in bytes");
        overlap_ = app_.add_option("--overlap", opt_.overlap, "Chunk overlap in bytes");

        ingest_ = app_.add_subcommand("ingest", "Validate inputs and write both indices to --out");
        ask_ = app_.add_subcommand("ask", "Answer a single query");
        ask_->add_option("--query,query", opt_.query, "Question text")->required();
        eval_ = app_.add_subcommand("eval", "Run every QA pair through both modes and write reports");
        dot_ = app_.add_subcommand("export-dot", "Write the knowledge graph as Graphviz DOT");
    }

    int run(int argc, char** argv) {
        try {
            app_.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app_.exit(e);
            return code == 0 ? 0 : kExitUsage;
        }
        try {
            cfg_ = build_config();
            if (ingest_->parsed()) return ingest();
            if (ask_->parsed()) return ask();
            if (eval_->parsed()) return eval();
            if (dot_->parsed()) return export_dot();
        } catch (const kgrag::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            switch (e.category()) {
            case kgrag::ErrorCategory::usage: return kExitUsage;
            case kgrag::ErrorCategory::data: return kExitData;
            case kgrag::ErrorCategory::backend: return kExitBackend;
            }
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitData;
        }
        return kExitUsage;
    }

private:
    kgrag::EvalConfig build_config() const {
        kgrag::EvalConfig cfg;
        if (!opt_.config.empty()) cfg = kgrag::load_eval_config(opt_.config);
        if (*mode_) cfg.modes = kgrag::parse_mode_selection(opt_.mode);
        if (*k_) cfg.pipeline.k = opt_.k;
        if (*max_chars_) cfg.pipeline.chunking.max_chars = opt_.max_chars;
        if (*overlap_) cfg.pipeline.chunking.overlap_chars = opt_.overlap;
        cfg.validate();
        return cfg;
    }

    static void require(const std::string& value, const char* flag) {
        if (value.empty()) {
            throw kgrag::Error(kgrag::ErrorKind::invalid_argument, flag, "is required");
        }
    }

    struct Data {
        kgrag::Calendar calendar;
        std::vector<kgrag::ConversationMessage> messages;
    };

    Data load_data() const {
        require(opt_.calendar, "--calendar");
        kgrag::Diagnostics warnings;
        Data d;
        d.calendar = kgrag::load_calendar(opt_.calendar, &warnings);
        if (!opt_.conversations.empty()) {
            d.messages = kgrag::load_conversations(opt_.conversations, &warnings);
        }
        print_warnings(warnings);
        return d;
    }

    std::vector<kgrag::DocumentChunk> corpus(kgrag::Mode mode, const Data& d) const {
        return mode == kgrag::Mode::baseline
                   ? kgrag::build_baseline_corpus(d.calendar, d.messages, cfg_.pipeline.chunking)
                   : kgrag::build_kg_corpus(d.calendar, d.messages, extractor_, cfg_.pipeline.chunking);
    }

    int ingest() const {
        require(opt_.out, "--out");
        const Data d = load_data();
        const auto provider = make_embedder(opt_.embedder);
        fs::create_directories(opt_.out);
        for (kgrag::Mode mode : kgrag::modes_of(cfg_.modes)) {
            const auto index = kgrag::build_index(corpus(mode, d), *provider);
            nlohmann::ordered_json config = kgrag::pipeline_config_to_json(cfg_.pipeline);
            config["mode"] = kgrag::to_string(mode);
            config["embedder"] = provider->name();
            const fs::path base = fs::path(opt_.out) / std::string(kgrag::to_string(mode));
            index.save(base, config);
            std::cout << kgrag::to_string(mode) << ": " << index.size() << " chunks, dimension "
                      << index.dimension() << " -> " << base.string() << ".{json,bin}\n";
        }
        const auto graph = kgrag::build_knowledge_graph(d.calendar, d.messages, extractor_);
        const fs::path tsv = fs::path(opt_.out) / "triples.tsv";
        kgrag::write_file(tsv, kgrag::triples_to_tsv(graph.triples()));
        std::cout << "triples: " << graph.size() << " -> " << tsv.string() << "\n";
        return 0;
    }

    int ask() const {
        const Data d = load_data();
        const auto provider = make_embedder(opt_.embedder);
        const auto client = make_llm(opt_.llm, cfg_.pipeline.prompt);
        for (kgrag::Mode mode : kgrag::modes_of(cfg_.modes)) {
            kgrag::PipelineConfig pc = cfg_.pipeline;
            pc.mode = mode;
            const kgrag::RetrievalQa qa(provider, corpus(mode, d), pc);
            const auto answer = qa.answer(opt_.query, *client);
            std::cout << "[" << kgrag::to_string(mode) << "] " << answer.text << "\n";
            for (const auto& hit : answer.retrieved) {
                std::cout << "  " << hit.chunk_id << " (" << kgrag::detail::fixed(hit.score, 3)
                          << "): " << qa.index().chunk(hit.chunk_id).text << "\n";
            }
            std::cout << "  latency: " << kgrag::detail::fixed(answer.latency_seconds, 4) << " s\n";
        }
        return 0;
    }

    int eval() const {
        require(opt_.calendar, "--calendar");
        require(opt_.qa, "--qa");
        require(opt_.out, "--out");
        const auto provider = make_embedder(opt_.embedder);
        const auto client = make_llm(opt_.llm, cfg_.pipeline.prompt);
        kgrag::Diagnostics warnings;
        const auto report = kgrag::run_eval(cfg_, opt_.calendar, opt_.conversations, opt_.qa, provider,
                                            *client, extractor_, &warnings);
        print_warnings(warnings);
        kgrag::emit_report(report, opt_.out);
        for (const auto& m : report.modes) {
            std::cout << kgrag::to_string(m.mode) << ": ROUGE-1 F1 "
                      << kgrag::detail::fixed(m.aggregate.rouge1.f1, 3) << ", ROUGE-2 F1 "
                      << kgrag::detail::fixed(m.aggregate.rouge2.f1, 3) << ", ROUGE-L F1 "
                      << kgrag::detail::fixed(m.aggregate.rougeL.f1, 3) << ", BLEU-1 "
                      << kgrag::detail::fixed(m.aggregate.bleu1, 3) << ", mean latency "
                      << kgrag::detail::fixed(m.mean_latency_seconds, 4) << " s\n";
        }
        std::cout << "reports written to " << opt_.out << "\n";
        return 0;
    }

    int export_dot() const {
        const Data d = load_data();
        const auto graph = kgrag::build_knowledge_graph(d.calendar, d.messages, extractor_);
        const std::string dot = kgrag::export_dot(graph);
        if (opt_.out.empty()) {
            std::cout << dot;
            return 0;
        }
        fs::create_directories(opt_.out);
        kgrag::write_file(fs::path(opt_.out) / "kg.dot", dot);
        std::cout << graph.size() << " edges, " << graph.nodes().size() << " nodes -> "
                  << (fs::path(opt_.out) / "kg.dot").string() << "\n";
        return 0;
    }

    CLI::App app_{"Personal knowledge-graph RAG: ingest, ask, eval, export-dot"};
    Options opt_;
    CLI::Option* mode_ = nullptr;
    CLI::Option* k_ = nullptr;
    CLI::Option* max_chars_ = nullptr;
    CLI::Option* overlap_ = nullptr;
    CLI::App* ingest_ = nullptr;
    CLI::App* ask_ = nullptr;
    CLI::App* eval_ = nullptr;
    CLI::App* dot_ = nullptr;
    kgrag::EvalConfig cfg_;
    kgrag::LexiconExtractor extractor_;
};

} // namespace

int main(int argc, char** argv) {
    Cli cli;
    return cli.run(argc, argv);
}
