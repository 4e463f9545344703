#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "opo/corpus.hpp"
#include "opo/errors.hpp"
#include "opo/text.hpp"

using namespace opo;

namespace {

const std::string kFixtures = OPO_FIXTURE_DIR;

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        path = std::string(std::tmpnam(nullptr)) + ".jsonl";
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("ingest professional guideline records") {
    auto rules = ingest_rules(kFixtures + "/moral_rules.jsonl", CorpusKind::professional_moral);
    // pm-1, pm-2, and the three-paragraph T1 record split into T1-1..T1-3
    REQUIRE(rules.size() == 5);
    CHECK(rules[0].id == "pm-1");
    CHECK(rules[0].corpus_kind == CorpusKind::professional_moral);
    CHECK(rules[2].id == "T1-1");
    CHECK(rules[3].id == "T1-2");
    CHECK(rules[4].id == "T1-3");
    CHECK(rules[2].text == "Honesty builds trust within a community.");
    for (const auto& r : rules) CHECK(r.char_len == codepoint_count(r.text));
}

TEST_CASE("legal rules are never paragraph-split") {
    TempFile f(R"({"id":"L1","jurisdiction":"national","source_doc":"s","text":"para one.\n\npara two."})"
               "\n");
    auto rules = ingest_rules(f.path, CorpusKind::legal);
    REQUIRE(rules.size() == 1);
    CHECK(rules[0].text.find("para two") != std::string::npos);
}

TEST_CASE("ingestion is idempotent") {
    auto a = ingest_rules(kFixtures + "/legal_rules.jsonl", CorpusKind::legal);
    auto b = ingest_rules(kFixtures + "/legal_rules.jsonl", CorpusKind::legal);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].text == b[i].text);
        CHECK(a[i].jurisdiction == b[i].jurisdiction);
    }
}

TEST_CASE("malformed and invalid records fail with line numbers") {
    SUBCASE("empty text") {
        TempFile f("{\"id\":\"a\",\"source_doc\":\"s\",\"text\":\"ok\"}\n"
                   "{\"id\":\"b\",\"source_doc\":\"s\",\"text\":\"   \"}\n");
        CHECK_THROWS_WITH_AS(ingest_rules(f.path, CorpusKind::basic_moral),
                             doctest::Contains("line 2"), DataError);
    }
    SUBCASE("broken json") {
        TempFile f("{not json}\n");
        CHECK_THROWS_WITH_AS(ingest_rules(f.path, CorpusKind::basic_moral),
                             doctest::Contains("line 1"), DataError);
    }
    SUBCASE("duplicate id names both occurrences") {
        TempFile f("{\"id\":\"x\",\"source_doc\":\"s\",\"text\":\"one\"}\n"
                   "{\"id\":\"x\",\"source_doc\":\"s\",\"text\":\"two\"}\n");
        CHECK_THROWS_WITH_AS(ingest_rules(f.path, CorpusKind::basic_moral),
                             doctest::Contains("lines 1 and 2"), DataError);
    }
    SUBCASE("legal rule without jurisdiction") {
        TempFile f("{\"id\":\"x\",\"source_doc\":\"s\",\"text\":\"one\"}\n");
        CHECK_THROWS_AS(ingest_rules(f.path, CorpusKind::legal), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(ingest_rules("/nonexistent/rules.jsonl", CorpusKind::legal), DataError);
    }
}

TEST_CASE("compute_stats") {
    SUBCASE("empty corpus") { CHECK(compute_stats({}).empty()); }

    SUBCASE("arithmetic mean per kind") {
        Rule a{"a", CorpusKind::legal, "national", "s", {}, std::string(100, 'x'), 100};
        Rule b{"b", CorpusKind::legal, "national", "s", {}, std::string(200, 'x'), 200};
        auto stats = compute_stats({a, b});
        REQUIRE(stats.size() == 1);
        CHECK(stats[0].count == 2);
        CHECK(stats[0].avg_char_len == doctest::Approx(150.0));
    }

    SUBCASE("counts sum to input size") {
        auto legal = ingest_rules(kFixtures + "/legal_rules.jsonl", CorpusKind::legal);
        auto moral = ingest_rules(kFixtures + "/moral_rules.jsonl", CorpusKind::professional_moral);
        std::vector<Rule> all = legal;
        all.insert(all.end(), moral.begin(), moral.end());
        std::size_t total = 0;
        for (const auto& s : compute_stats(all)) total += s.count;
        CHECK(total == all.size());
    }
}

TEST_CASE("rules round-trip through save/load") {
    auto rules = ingest_rules(kFixtures + "/legal_rules.jsonl", CorpusKind::legal);
    TempFile f("");
    save_rules(rules, f.path);
    auto loaded = load_rules(f.path);
    REQUIRE(loaded.size() == rules.size());
    for (std::size_t i = 0; i < rules.size(); ++i) {
        CHECK(loaded[i].id == rules[i].id);
        CHECK(loaded[i].text == rules[i].text);
        CHECK(loaded[i].char_len == rules[i].char_len);
    }
}

TEST_CASE("derive_social_rule pipeline") {
    auto scenarios = load_scenarios(kFixtures + "/scenarios.jsonl");
    REQUIRE(scenarios.size() == 10);

    SUBCASE("explanation becomes the rule text") {
        ScriptedMockBackend chat([](const ChatRequest& req) {
            return req.joined_content().rfind("Rewrite", 0) == 0 ? "S" : "E";
        });
        Rule r = derive_social_rule(scenarios[0], chat);
        CHECK(r.text == "E");
        CHECK(r.corpus_kind == CorpusKind::social_moral);
        CHECK(r.id == scenarios[0].id);
        CHECK(chat.call_count() == 2);
    }

    SUBCASE("failure on the explanation call is tagged") {
        ScriptedMockBackend chat([](const ChatRequest& req) -> std::string {
            if (req.joined_content().rfind("Rewrite", 0) == 0) return "S";
            throw std::runtime_error("backend down");
        });
        CHECK_THROWS_WITH_AS(derive_social_rule(scenarios[0], chat),
                             doctest::Contains("stage=explanation"), ProviderError);
    }

    SUBCASE("batch preserves record order") {
        auto chat = ScriptedMockBackend::constant("explanation text");
        auto rules = derive_social_rules(scenarios, *chat);
        REQUIRE(rules.size() == scenarios.size());
        for (std::size_t i = 0; i < rules.size(); ++i) CHECK(rules[i].id == scenarios[i].id);
    }
}
