#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "opo/corpus.hpp"
#include "opo/errors.hpp"
#include "opo/qgen.hpp"

using namespace opo;

namespace {

const std::string kFixtures = OPO_FIXTURE_DIR;

struct TempPath {
    std::string path;
    TempPath() : path(std::tmpnam(nullptr)) {}
    ~TempPath() { std::remove(path.c_str()); }
};

struct Corpus {
    std::vector<Rule> rules;
    VectorIndex index{16};
    DeterministicProvider provider{16, "qgen"};

    explicit Corpus(std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            Rule r;
            r.id = "r" + std::to_string(i);
            r.corpus_kind = CorpusKind::professional_moral;
            r.text = "Principle number " + std::to_string(i) + " about professional conduct.";
            r.char_len = r.text.size();
            rules.push_back(r);
            index.add(r.id, provider.embed(r.text), "professional_moral");
        }
        index.seal();
    }
};

std::string well_formed_candidate() {
    return "STEM: What should a professional do?\nA: Follow the principle.\nB: Ignore it.\n"
           "C: Delay action.\nD: Delegate blame.\nANALYSIS: The principle requires action.\n"
           "ANSWER: A";
}

SeedQuestion one_seed() {
    SeedQuestion s;
    s.stem = "Seed stem";
    s.options = {"w", "x", "y", "z"};
    s.analysis = "seed analysis";
    s.applied_rules = {"rule text"};
    s.answer = 'B';
    return s;
}

}  // namespace

TEST_CASE("build_generation_context") {
    Corpus c(10);

    SUBCASE("seeded determinism") {
        SplitMixRng rng1(42), rng2(42);
        auto a = build_generation_context(c.rules, c.index, c.provider, 3, rng1);
        auto b = build_generation_context(c.rules, c.index, c.provider, 3, rng2);
        CHECK(a.context.anchor_rule_id == b.context.anchor_rule_id);
        CHECK(a.context.rule_ids == b.context.rule_ids);
        CHECK_FALSE(a.truncated);
        CHECK(a.context.rule_ids.size() == 4);  // anchor + 3 neighbors
    }
    SUBCASE("anchor never repeats in the context") {
        SplitMixRng rng(7);
        for (int i = 0; i < 100; ++i) {
            auto built = build_generation_context(c.rules, c.index, c.provider, 4, rng);
            std::set<std::string> uniq(built.context.rule_ids.begin(),
                                       built.context.rule_ids.end());
            CHECK(uniq.size() == built.context.rule_ids.size());
            CHECK(built.context.rule_ids.front() == built.context.anchor_rule_id);
        }
    }
    SUBCASE("degenerate corpus truncates with a flag") {
        Corpus tiny(1);
        SplitMixRng rng(1);
        auto built = build_generation_context(tiny.rules, tiny.index, tiny.provider, 3, rng);
        CHECK(built.truncated);
        CHECK(built.context.rule_ids.size() == 1);
        CHECK(built.context.combined_text == tiny.rules[0].text);
    }
}

TEST_CASE("anchor sampling is roughly uniform") {
    Corpus c(10);
    SplitMixRng rng(123);
    std::map<std::string, int> counts;
    const int draws = 5000;
    for (int i = 0; i < draws; ++i)
        counts[build_generation_context(c.rules, c.index, c.provider, 1, rng)
                   .context.anchor_rule_id]++;
    // chi-square against uniform over 10 cells; 99.9% critical value for df=9
    double chi2 = 0.0, expect = draws / 10.0;
    for (const auto& [id, n] : counts) chi2 += (n - expect) * (n - expect) / expect;
    CHECK(counts.size() == 10);
    CHECK(chi2 < 27.88);
}

TEST_CASE("generate_candidate") {
    Corpus c(6);
    SplitMixRng rng(5);
    auto built = build_generation_context(c.rules, c.index, c.provider, 2, rng);
    QGenConfig cfg;
    cfg.mode_type = "morality";
    cfg.element = "hospital";

    SUBCASE("happy path parses four options and carries provenance") {
        auto mock = ScriptedMockBackend::constant(well_formed_candidate());
        auto res = generate_candidate(cfg, built.context, one_seed(), *mock, "cand-1");
        REQUIRE(res.question.has_value());
        CHECK(res.question->options[0] == "Follow the principle.");
        CHECK(res.question->answer == 'A');
        CHECK(res.question->provenance_rule_ids == built.context.rule_ids);
    }
    SUBCASE("three options is a parse error preserving the raw text") {
        auto mock = ScriptedMockBackend::constant(
            "STEM: s\nA: a\nB: b\nC: c\nANALYSIS: x\nANSWER: A");
        auto res = generate_candidate(cfg, built.context, one_seed(), *mock, "cand-2");
        REQUIRE(res.error.has_value());
        CHECK(res.error->raw_text.find("STEM: s") != std::string::npos);
        CHECK_FALSE(res.question.has_value());
    }
    SUBCASE("rendered prompt embeds seed and principles verbatim") {
        auto mock = ScriptedMockBackend::constant(well_formed_candidate());
        auto res = generate_candidate(cfg, built.context, one_seed(), *mock, "cand-3");
        CHECK(res.rendered_prompt.find("Seed stem") != std::string::npos);
        CHECK(res.rendered_prompt.find(built.context.combined_text) != std::string::npos);
        CHECK(res.rendered_prompt.find("morality") != std::string::npos);
        CHECK(res.rendered_prompt.find("hospital") != std::string::npos);
    }
}

TEST_CASE("quality_gate") {
    Corpus c(6);
    SplitMixRng rng(5);
    auto built = build_generation_context(c.rules, c.index, c.provider, 2, rng);
    QGenConfig cfg;
    MCQuestion q;
    q.id = "cand";
    q.stem = "stem";
    q.options = {"a", "b", "c", "d"};
    q.answer = 'A';

    SUBCASE("all-pass accepts") {
        auto mock = ScriptedMockBackend::constant(
            "STEM_OK: yes\nOPTIONS_OK: yes\nANALYSIS_OK: yes\nANSWER_OK: yes\nRATIONALE: fine");
        auto v = quality_gate(q, built.context, cfg, *mock);
        CHECK(v.accepted());
        CHECK(v.rationale == "fine");
    }
    SUBCASE("one failing criterion rejects") {
        auto mock = ScriptedMockBackend::constant(
            "STEM_OK: yes\nOPTIONS_OK: no\nANALYSIS_OK: yes\nANSWER_OK: yes\nRATIONALE: bad");
        CHECK_FALSE(quality_gate(q, built.context, cfg, *mock).accepted());
    }
    SUBCASE("unparseable verdict rejects with a marker") {
        auto mock = ScriptedMockBackend::constant("garbage");
        auto v = quality_gate(q, built.context, cfg, *mock);
        CHECK_FALSE(v.accepted());
        CHECK(v.rationale == "verdict_parse_failure");
    }
}

TEST_CASE("pipeline filtering arithmetic and discard accounting") {
    Corpus c(20);
    auto seed_bank = load_seed_bank(kFixtures + "/seed_bank_law.jsonl");
    QGenConfig cfg;
    auto generator = ScriptedMockBackend::constant(well_formed_candidate());

    // evaluator scripted to fail exactly every 10th candidate
    int n = 0;
    ScriptedMockBackend evaluator([&n](const ChatRequest&) -> std::string {
        ++n;
        bool fail = n % 10 == 0;
        return std::string("STEM_OK: yes\nOPTIONS_OK: ") + (fail ? "no" : "yes") +
               "\nANALYSIS_OK: yes\nANSWER_OK: yes\nRATIONALE: r";
    });
    SplitMixRng rng(9);
    auto result =
        run_generation(c.rules, c.index, c.provider, cfg, seed_bank, 50, *generator, evaluator, rng);
    CHECK(result.accepted.size() == 45);
    CHECK(result.discarded.size() == 5);
    CHECK(result.accepted.size() + result.discarded.size() == 50);
    for (const auto& q : result.accepted) {
        CHECK_FALSE(q.provenance_rule_ids.empty());
        auto by_id = rules_by_id(c.rules);
        for (const auto& rid : q.provenance_rule_ids) CHECK(by_id.count(rid) == 1);
    }
}

TEST_CASE("review export and 2-of-3 import") {
    std::vector<MCQuestion> accepted;
    for (int i = 0; i < 3; ++i) {
        MCQuestion q;
        q.id = "g" + std::to_string(i);
        q.stem = "stem";
        q.options = {"a", "b", "c", "d"};
        q.answer = 'B';
        q.analysis = "secret analysis";
        accepted.push_back(q);
    }
    TempPath review;
    export_for_review(accepted, review.path);

    SUBCASE("export omits the analysis") {
        std::ifstream in(review.path);
        std::string all((std::istreambuf_iterator<char>(in)), {});
        CHECK(all.find("secret analysis") == std::string::npos);
        CHECK(all.find("votes") != std::string::npos);
    }
    SUBCASE("two rejects remove, one reject keeps") {
        std::ofstream out(review.path);
        out << R"({"id":"g0","votes":["reject","reject","keep"]})" << "\n";
        out << R"({"id":"g1","votes":["keep","keep","reject"]})" << "\n";
        out << R"({"id":"g2","votes":["","",""]})" << "\n";
        out.close();
        auto kept = import_review(accepted, review.path);
        REQUIRE(kept.size() == 2);
        CHECK(kept[0].id == "g1");
        CHECK(kept[1].id == "g2");
    }
}
