// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "kgrag/harness.hpp"
#include "oracles.hpp"

using namespace kgrag;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = KGRAG_FIXTURE_DIR;

struct Outcome {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
    void check(bool cond, const std::string& why) {
        if (!cond) fail(why);
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

bool close(double a, double b) { return std::fabs(a - b) <= 1e-9; }

std::shared_ptr<const EmbeddingProvider> hash() { return std::make_shared<HashEmbedder>(); }

EvalReport fixture_eval() {
    const ExtractiveMockClient mock;
    return run_eval(EvalConfig{}, kFixtures / "calendar.json", kFixtures / "conversations.jsonl",
                    kFixtures / "qa_pairs.json", hash(), mock);
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("kgrag_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

Outcome metric_oracles() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(600);
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = oracle::random_tokens(rng, 12, 5);
        const auto r = oracle::random_tokens(rng, 12, 5);
        for (int n : {1, 2}) {
            const auto got = rouge_n(c, r, n);
            const auto want = oracle::rouge_n(c, r, static_cast<std::size_t>(n));
            out.check(close(got.precision, want.p) && close(got.recall, want.r) && close(got.f1, want.f),
                      "rouge_n mismatch at trial " + std::to_string(trial));
        }
        const auto got = rouge_l(c, r);
        const auto want = oracle::rouge_l(c, r);
        out.check(close(got.precision, want.p) && close(got.recall, want.r) && close(got.f1, want.f),
                  "rouge_l mismatch at trial " + std::to_string(trial));
    }
    for (int trial = 0; trial < 100; ++trial) {
        const auto c = oracle::random_tokens(rng, 12, 5);
        const auto r = oracle::random_tokens(rng, 12, 5);
        for (int n = 1; n <= 4; ++n) {
            out.check(close(bleu(c, r, n), oracle::bleu(c, r, static_cast<std::size_t>(n))),
                      "bleu mismatch at trial " + std::to_string(trial));
        }
    }
    const double dt = seconds_since(t0);
    out.check(dt < 5.0, "took " + num(dt) + " s");
    if (out.ok) out.detail = "200 ROUGE pairs, 100 BLEU pairs within 1e-9 in " + num(dt) + " s";
    return out;
}

Outcome retrieval_exactness() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(601);
    const std::size_t dim = 64;
    std::vector<std::vector<float>> rows;
    std::vector<DocumentChunk> chunks;
    std::vector<EmbeddingVector> vectors;
    for (std::size_t i = 0; i < 1000; ++i) {
        rows.push_back(oracle::random_unit_vector(rng, dim));
        chunks.push_back({"v" + std::to_string(i), "", ChunkKind::raw, "", 0});
        vectors.push_back({rows.back(), true});
    }
    const VectorIndex index(dim, chunks, vectors);
    for (int q = 0; q < 50; ++q) {
        const auto query = oracle::random_unit_vector(rng, dim);
        for (std::size_t k : {1u, 5u, 50u}) {
            const auto want = oracle::full_sort_top_k(rows, query, k);
            const auto got = index.top_k({query, true}, k);
            if (got.size() != want.size()) {
                out.fail("size mismatch for k=" + std::to_string(k));
                continue;
            }
            for (std::size_t i = 0; i < got.size(); ++i) {
                out.check(got[i].chunk_id == "v" + std::to_string(want[i].first) && close(got[i].score, want[i].second),
                          "rank " + std::to_string(i) + " differs for k=" + std::to_string(k));
            }
        }
    }
    const double dt = seconds_since(t0);
    out.check(dt < 5.0, "took " + num(dt) + " s");
    if (out.ok) out.detail = "50 queries x k in {1,5,50} over 1000 vectors in " + num(dt) + " s";
    return out;
}

Outcome kg_golden() {
    Outcome out;
    const auto got = calendar_to_triples(load_calendar(kFixtures / "alex_january.json"));
    const auto want = parse_triples_tsv(read_file(kFixtures / "alex_january_triples.tsv"), "golden");
    out.check(want.size() == 9, "golden file has " + std::to_string(want.size()) + " triples");
    out.check(got == want, "triples differ from golden file");
    out.check(triples_to_tsv(got) == read_file(kFixtures / "alex_january_triples.tsv"), "TSV bytes differ");
    if (out.ok) out.detail = "9 triples match alex_january_triples.tsv";
    return out;
}

Outcome raksha_bandhan() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const auto cal = load_calendar(kFixtures / "calendar.json");
    const auto msgs = load_conversations(kFixtures / "conversations.jsonl");
    const std::string question = "What is the event on August 19th, 2024?";
    bool listed = false;
    for (const auto& p : load_qa_pairs(kFixtures / "qa_pairs.json")) listed = listed || p.question == question;
    out.check(listed, "question missing from qa_pairs.json");

    PipelineConfig cfg;
    cfg.mode = Mode::kg;
    const RetrievalQa qa(hash(), build_kg_corpus(cal, msgs, LexiconExtractor{}), cfg);
    const auto answer = qa.answer(question, ExtractiveMockClient{});
    const double dt = seconds_since(t0);
    if (answer.text.find("Raksha Bandhan") == std::string::npos) {
        std::string top;
        for (const auto& hit : answer.retrieved) top += (top.empty() ? "" : " | ") + qa.index().chunk(hit.chunk_id).text;
        out.fail("answer \"" + answer.text + "\"; retrieved: " + top);
    }
    out.check(dt < 2.0, "took " + num(dt) + " s");
    if (out.ok) out.detail = "answer \"" + answer.text + "\" in " + num(dt) + " s";
    return out;
}

Outcome kg_beats_baseline(const EvalReport& report) {
    Outcome out;
    const auto* base = report.find(Mode::baseline);
    const auto* kg = report.find(Mode::kg);
    if (!base || !kg) {
        out.fail("report lacks a mode");
        return out;
    }
    out.check(base->questions.size() >= 20, "fewer than 20 questions");
    const double b = base->aggregate.rouge1.f1;
    const double k = kg->aggregate.rouge1.f1;
    out.detail = "ROUGE-1 F1 kg " + num(k) + " vs baseline " + num(b);
    if (k < b) out.fail(out.detail);
    return out;
}

Outcome timing_report() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = fixture_eval();
    const auto dir = scratch("timing");
    emit_report(report, dir);
    const double dt = seconds_since(t0);

    const auto md = read_file(dir / "report.md");
    out.check(md.find("| LLM Model | Parameters | Baseline | KG |") != std::string::npos, "latency table missing");
    const auto timing = nlohmann::json::parse(read_file(dir / "timing.json"));
    std::size_t fields = 0;
    for (const auto& m : timing.at("modes")) {
        const auto& mean = m.at("mean_latency_seconds");
        out.check(mean.is_number() && mean.get<double>() >= 0.0, "bad mean latency");
        ++fields;
        for (const auto& q : m.at("questions")) {
            out.check(q.at("latency_seconds").get<double>() >= 0.0, "negative latency");
        }
    }
    out.check(fields == 2, "expected two modes in timing.json");
    out.check(dt < 10.0, "took " + num(dt) + " s");
    if (out.ok) out.detail = "dual-mode run and report in " + num(dt) + " s";
    return out;
}

Outcome determinism() {
    Outcome out;
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    emit_report(fixture_eval(), a);
    emit_report(fixture_eval(), b);
    const auto ja = read_file(a / "report.json");
    out.check(ja == read_file(b / "report.json"), "report.json differs between runs");
    if (out.ok) out.detail = "report.json identical (" + std::to_string(ja.size()) + " bytes)";
    return out;
}

Outcome round_trips(const EvalReport& report) {
    Outcome out;
    for (const char* name : {"alex_january.json", "calendar.json"}) {
        const auto cal = load_calendar(kFixtures / name);
        out.check(parse_calendar(serialize_calendar(cal), "rt") == cal, std::string(name) + " round-trip");
    }
    const auto msgs = load_conversations(kFixtures / "conversations.jsonl");
    out.check(parse_conversations(serialize_conversations(msgs), "rt") == msgs, "conversations round-trip");
    const auto pairs = load_qa_pairs(kFixtures / "qa_pairs.json");
    out.check(parse_qa_pairs(serialize_qa_pairs(pairs), "rt") == pairs, "qa round-trip");
    const auto triples = parse_triples_tsv(read_file(kFixtures / "alex_january_triples.tsv"), "rt");
    out.check(parse_triples_tsv(triples_to_tsv(triples), "rt") == triples, "triples round-trip");
    out.check(parse_report_with_timing(report_json(report), timing_json(report)) == report, "report round-trip");
    if (out.ok) out.detail = "calendar, conversations, qa, triples, report";
    return out;
}

Outcome guarded(const std::function<Outcome()>& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return {false, std::string("exception: ") + e.what()};
    }
}

} // namespace

int main() {
    EvalReport report;
    try {
        report = fixture_eval();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fixture eval failed: %s\n", e.what());
        return 1;
    }

    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"metric oracle equivalence", metric_oracles},
        {"retrieval exactness", retrieval_exactness},
        {"kg golden file", kg_golden},
        {"kg answer names Raksha Bandhan", raksha_bandhan},
        {"kg ROUGE-1 F1 >= baseline", [&] { return kg_beats_baseline(report); }},
        {"timing report", timing_report},
        {"deterministic report.json", determinism},
        {"round-trips", [&] { return round_trips(report); }},
    };

    int failed = 0;
    int n = 0;
    for (const auto& [name, fn] : criteria) {
        const auto out = guarded(fn);
        failed += out.ok ? 0 : 1;
        std::printf("[%s] %d: %s -- %s\n", out.ok ? "PASS" : "FAIL", ++n, name, out.detail.c_str());
    }
    std::printf("%d/%d criteria passed\n", n - failed, n);
    return failed == 0 ? 0 : 1;
}
