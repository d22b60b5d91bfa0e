#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "kgrag/io.hpp"
#include "kgrag/pipeline.hpp"

using namespace kgrag;

namespace {

const std::filesystem::path kFixtures = KGRAG_FIXTURE_DIR;

std::shared_ptr<const EmbeddingProvider> hash() { return std::make_shared<HashEmbedder>(); }

PipelineConfig config(Mode mode, std::size_t k = 3) {
    PipelineConfig c;
    c.mode = mode;
    c.k = k;
    return c;
}

class ThrowingClient final : public LlmClient {
public:
    std::string generate(const std::string&, const GenerationParams&) const override {
        throw Error(ErrorKind::backend_error, "http://llm", "503 unavailable");
    }
    std::string name() const override { return "throwing"; }
};

class RecordingClient final : public LlmClient {
public:
    std::string generate(const std::string& prompt, const GenerationParams&) const override {
        last = prompt;
        return "ok";
    }
    std::string name() const override { return "recording"; }
    mutable std::string last;
};

} // namespace

TEST(BaselineCorpus, SerializesCalendarLines) {
    const auto chunks = build_baseline_corpus(load_calendar(kFixtures / "alex_january.json"), {});
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_NE(chunks[0].text.find("Team Meeting on 2024-01-15 from 09:00 - 10:00."), std::string::npos);
    EXPECT_EQ(chunks[0].kind, ChunkKind::raw);
    EXPECT_EQ(chunks[0].provenance, "January");
}

TEST(BaselineCorpus, ConversationLines) {
    const std::vector<ConversationMessage> msgs = {{"c1", 0, "Alex", "Hi"}, {"c1", 1, "Sam", "Hello"}};
    const auto docs = conversation_documents(msgs);
    ASSERT_EQ(docs.size(), 1u);
    EXPECT_EQ(docs[0].text, "Alex: Hi\nSam: Hello");
}

TEST(BaselineCorpus, EmptyInputs) {
    EXPECT_TRUE(build_baseline_corpus(Calendar{}, {}).empty());
}

TEST(KgCorpus, OneChunkPerTriple) {
    const auto chunks = build_kg_corpus(load_calendar(kFixtures / "alex_january.json"), {}, LexiconExtractor{});
    ASSERT_EQ(chunks.size(), 9u);
    for (const auto& c : chunks) {
        EXPECT_EQ(c.kind, ChunkKind::kg);
        EXPECT_EQ(c.text.back(), '.');
        EXPECT_EQ(c.provenance, "January");
    }
    EXPECT_EQ(chunks[3].text, "Alex has event Team Meeting on 2024-01-15.");
    EXPECT_EQ(chunks[3].chunk_id, "January#3");
    EXPECT_TRUE(build_kg_corpus(Calendar{}, {}, LexiconExtractor{}).empty());
}

TEST(KgCorpus, OversizeLineSplitIntoUniqueIds) {
    KnowledgeGraph g;
    std::string long_target;
    for (int i = 0; i < 40; ++i) long_target += "word" + std::to_string(i) + " ";
    g.add({"Alex", "wrote", long_target, "c:0"});
    g.add({"Alex", "said in", "c", "c:0"});
    const auto chunks = kg_corpus_from_graph(g, {64, 8});
    ASSERT_GT(chunks.size(), 2u);
    std::set<std::string> ids;
    for (const auto& c : chunks) {
        EXPECT_LE(c.text.size(), 64u);
        EXPECT_TRUE(ids.insert(c.chunk_id).second);
        EXPECT_EQ(c.provenance, "c:0");
    }
    EXPECT_EQ(chunks.front().chunk_id, "c:0#0.0");
    EXPECT_EQ(chunks.back().chunk_id, "c:0#1");
}

TEST(Answer, RakshaBandhanFromKgCorpus) {
    const Calendar cal = parse_calendar(
        R"({"AlexCalendar2024": {"August": [{"event": "Raksha Bandhan", "date": "2024-08-19", "time": "All day"}]}})",
        "mem");
    const RetrievalQa qa(hash(), build_kg_corpus(cal, {}, LexiconExtractor{}), config(Mode::kg));
    const auto a = qa.answer("What is the event on August 19th, 2024?", ExtractiveMockClient{});
    EXPECT_NE(a.text.find("Raksha Bandhan"), std::string::npos) << a.text;
    EXPECT_EQ(a.retrieved.size(), 3u);
    EXPECT_GE(a.latency_seconds, 0.0);
}

TEST(Answer, EmptyIndexGivesDontKnow) {
    const RetrievalQa qa(hash(), std::vector<DocumentChunk>{}, config(Mode::kg));
    const auto a = qa.answer("Anything?", ExtractiveMockClient{});
    EXPECT_EQ(a.text, "I don't know.");
    EXPECT_TRUE(a.retrieved.empty());
    EXPECT_TRUE(a.context.empty());
}

TEST(Answer, RetrievedCountIsMinOfKAndCorpus) {
    const auto corpus = build_kg_corpus(load_calendar(kFixtures / "alex_january.json"), {}, LexiconExtractor{});
    for (std::size_t k : {1u, 3u, 9u, 20u}) {
        const RetrievalQa qa(hash(), corpus, config(Mode::kg, k));
        EXPECT_EQ(qa.answer("team meeting", ExtractiveMockClient{}).retrieved.size(), std::min<std::size_t>(k, 9));
    }
}

TEST(Answer, ContextJoinsChunksInRankOrder) {
    const auto corpus = build_kg_corpus(load_calendar(kFixtures / "alex_january.json"), {}, LexiconExtractor{});
    const RetrievalQa qa(hash(), corpus, config(Mode::kg));
    RecordingClient client;
    const auto a = qa.answer("When is the Family Dinner?", client);
    std::string want;
    for (const auto& hit : a.retrieved) {
        if (!want.empty()) want += '\n';
        want += qa.index().chunk(hit.chunk_id).text;
    }
    EXPECT_EQ(a.context, want);
    EXPECT_EQ(client.last, render_prompt(PromptTemplate(), want, "When is the Family Dinner?"));
    EXPECT_LE(a.context.size(), 3 * 512 + 2);
}

TEST(Answer, StageLabelledErrors) {
    const RetrievalQa qa(hash(), build_kg_corpus(load_calendar(kFixtures / "alex_january.json"), {}, LexiconExtractor{}),
                         config(Mode::kg));
    try {
        qa.answer("q", ThrowingClient{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::backend_error);
        EXPECT_NE(std::string(e.what()).find("generation stage"), std::string::npos) << e.what();
    }
    const RetrievalQa mismatched(std::make_shared<HashEmbedder>(32), qa.index(), config(Mode::kg));
    try {
        mismatched.answer("q", ExtractiveMockClient{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
        EXPECT_NE(std::string(e.what()).find("retrieval stage"), std::string::npos) << e.what();
    }
}

TEST(Modes, IndicesAreDisjointByKind) {
    const Calendar cal = load_calendar(kFixtures / "calendar.json");
    const auto msgs = load_conversations(kFixtures / "conversations.jsonl");
    const RetrievalQa base(hash(), build_baseline_corpus(cal, msgs), config(Mode::baseline));
    const RetrievalQa kg(hash(), build_kg_corpus(cal, msgs, LexiconExtractor{}), config(Mode::kg));
    for (const auto& c : base.index().chunks()) EXPECT_EQ(c.kind, ChunkKind::raw);
    for (const auto& c : kg.index().chunks()) EXPECT_EQ(c.kind, ChunkKind::kg);
    EXPECT_THROW(RetrievalQa(hash(), build_baseline_corpus(cal, msgs), config(Mode::kg)), Error);
}

TEST(Modes, DeterministicAndThreadSafe) {
    const Calendar cal = load_calendar(kFixtures / "calendar.json");
    const auto msgs = load_conversations(kFixtures / "conversations.jsonl");
    const RetrievalQa qa(hash(), build_kg_corpus(cal, msgs, LexiconExtractor{}), config(Mode::kg));
    const ExtractiveMockClient mock;
    const auto want = qa.answer("Who booked the cabin?", mock);
    std::vector<Answer> got(8);
    {
        std::vector<std::jthread> threads;
        for (auto& slot : got) threads.emplace_back([&] { slot = qa.answer("Who booked the cabin?", mock); });
    }
    for (const auto& a : got) {
        EXPECT_EQ(a.text, want.text);
        EXPECT_EQ(a.retrieved, want.retrieved);
    }
}

TEST(Config, JsonFileApplied) {
    PipelineConfig cfg;
    apply_pipeline_config(nlohmann::json::parse(read_file(kFixtures / "config.json")), cfg, "config.json");
    EXPECT_EQ(cfg.k, 3u);
    EXPECT_EQ(cfg.chunking, (ChunkingParams{512, 64}));
    EXPECT_EQ(cfg.params.max_tokens, 128);
    const auto j = pipeline_config_to_json(cfg);
    PipelineConfig again;
    apply_pipeline_config(nlohmann::json::parse(j.dump()), again, "rt");
    EXPECT_EQ(again, cfg);
}

TEST(Config, BadValuesRejected) {
    PipelineConfig cfg;
    EXPECT_THROW(apply_pipeline_config(nlohmann::json::parse(R"({"k": "three"})"), cfg, "m"), Error);
    EXPECT_THROW(apply_pipeline_config(nlohmann::json::parse(R"({"template": "no placeholders"})"), cfg, "m"), Error);
    EXPECT_THROW(apply_pipeline_config(nlohmann::json::parse(R"({"mode": "hybrid"})"), cfg, "m"), Error);
    EXPECT_THROW(apply_pipeline_config(nlohmann::json::parse("[]"), cfg, "m"), Error);
    cfg.k = 0;
    EXPECT_THROW(cfg.validate(), Error);
}
