#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>

#include "opo/qgen.hpp"
#include "opo/retrieval.hpp"
#include "opo/text.hpp"

using namespace opo;

namespace {

const std::string kFixtures = OPO_FIXTURE_DIR;

Rule make_rule(const std::string& id, std::size_t len) {
    Rule r;
    r.id = id;
    r.corpus_kind = CorpusKind::legal;
    r.jurisdiction = "national";
    r.text = std::string(len, 'x');
    r.char_len = len;
    return r;
}

}  // namespace

TEST_CASE("gazetteer location extraction") {
    Gazetteer gaz = Gazetteer::load(kFixtures + "/gazetteer.jsonl");
    REQUIRE(gaz.size() >= 30);

    CHECK(gaz.extract_locations("A contract was signed in Shanghai last week") ==
          std::set<std::string>{"Shanghai"});
    CHECK(gaz.extract_locations("Goods moved from Beijing to Guangdong") ==
          std::set<std::string>{"Beijing", "Guangdong"});
    CHECK(gaz.extract_locations("no region mentioned here").empty());
    // alias maps to the canonical name
    CHECK(gaz.extract_locations("a dispute in Xizang") == std::set<std::string>{"Tibet"});
}

TEST_CASE("partition selection") {
    CHECK(select_partitions({}, CorpusKind::legal) == std::set<std::string>{"national"});
    CHECK(select_partitions({"Shanghai"}, CorpusKind::legal) ==
          std::set<std::string>{"national", "Shanghai"});
    CHECK(select_partitions({"Shanghai"}, CorpusKind::basic_moral) ==
          std::set<std::string>{"basic_moral"});
}

TEST_CASE("assemble_context whole-rule greedy packing") {
    std::map<std::string, Rule> by_id;
    std::vector<SearchHit> hits;
    auto add = [&](const std::string& id, std::size_t len, int rank) {
        by_id[id] = make_rule(id, len);
        hits.push_back({id, 1.0 - 0.01 * rank, rank});
    };

    SUBCASE("separator counts against the budget") {
        add("r1", 6, 1);
        add("r2", 6, 2);
        auto ctx = assemble_context(hits, by_id, 10);
        REQUIRE(ctx.included_rules.size() == 1);  // 6 + 1 + 6 > 10
        CHECK(ctx.total_chars == 6);
    }
    SUBCASE("everything fits") {
        add("r1", 160, 1);
        add("r2", 160, 2);
        add("r3", 160, 3);
        auto ctx = assemble_context(hits, by_id, 2000);
        CHECK(ctx.included_rules.size() == 3);
        CHECK(ctx.total_chars == 482);
    }
    SUBCASE("empty hits give an empty context") {
        auto ctx = assemble_context({}, by_id, 100);
        CHECK(ctx.included_rules.empty());
        CHECK(ctx.total_chars == 0);
    }
}

TEST_CASE("budget safety and prefix order over random inputs") {
    SplitMixRng rng(99);
    const std::size_t budgets[] = {200, 500, 1000, 1500, 2000};
    for (int trial = 0; trial < 500; ++trial) {
        std::map<std::string, Rule> by_id;
        std::vector<SearchHit> hits;
        std::size_t n = 1 + rng.bounded(50);
        for (std::size_t i = 0; i < n; ++i) {
            std::string id = "r" + std::to_string(i);
            std::size_t len = 1 + rng.bounded(400);
            by_id[id] = make_rule(id, len);
            hits.push_back({id, 1.0 - 0.001 * static_cast<double>(i), static_cast<int>(i + 1)});
        }
        std::size_t budget = budgets[rng.bounded(5)];
        auto ctx = assemble_context(hits, by_id, budget);
        CHECK(ctx.total_chars <= budget);

        // oracle: largest prefix whose lengths (plus separators) fit
        std::size_t acc = 0, expect = 0;
        for (std::size_t i = 0; i < hits.size(); ++i) {
            std::size_t len = by_id[hits[i].rule_id].char_len + (i == 0 ? 0 : 1);
            if (acc + len > budget) break;
            acc += len;
            ++expect;
        }
        REQUIRE(ctx.included_rules.size() == expect);
        for (std::size_t i = 0; i < expect; ++i)
            CHECK(ctx.included_rules[i].first == hits[i].rule_id);
        CHECK(ctx.total_chars == acc);
    }
}

TEST_CASE("context char accounting uses codepoints") {
    std::map<std::string, Rule> by_id;
    Rule r;
    r.id = "cn";
    r.text = "法律规则";  // 4 scalars, 12 bytes
    r.char_len = codepoint_count(r.text);
    by_id["cn"] = r;
    auto ctx = assemble_context({{"cn", 1.0, 1}}, by_id, 4);
    CHECK(ctx.included_rules.size() == 1);
    CHECK(ctx.total_chars == 4);
}

TEST_CASE("render_prompt") {
    MCQuestion q;
    q.stem = "Which option is lawful?";
    q.options = {"one", "two", "three", "four"};
    PromptTemplate tmpl = PromptTemplate::default_answer_template();

    SUBCASE("base mode renders the question with an empty rules block") {
        std::string prompt = render_prompt(tmpl, {}, q);
        CHECK(prompt.find("Which option is lawful?") != std::string::npos);
        CHECK(prompt.find("A. one") != std::string::npos);
        CHECK(prompt.find("D. four") != std::string::npos);
        CHECK(prompt.find("{rules}") == std::string::npos);
    }
    SUBCASE("rule texts appear verbatim, in order, before the question") {
        AssembledContext ctx;
        ctx.included_rules = {{"r1", "first rule text"}, {"r2", "second rule text"}};
        std::string prompt = render_prompt(tmpl, ctx, q);
        auto p1 = prompt.find("first rule text");
        auto p2 = prompt.find("second rule text");
        auto pq = prompt.find("Which option is lawful?");
        REQUIRE(p1 != std::string::npos);
        REQUIRE(p2 != std::string::npos);
        CHECK(p1 < p2);
        CHECK(p2 < pq);
    }
    SUBCASE("byte-identical across calls") {
        AssembledContext ctx;
        ctx.included_rules = {{"r1", "rule"}};
        CHECK(render_prompt(tmpl, ctx, q) == render_prompt(tmpl, ctx, q));
    }
}
