#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opo/text.hpp"

using namespace opo;

TEST_CASE("codepoint_count counts scalars, not bytes") {
    CHECK(codepoint_count("") == 0);
    CHECK(codepoint_count("abc") == 3);
    CHECK(codepoint_count("中华人民") == 4);   // 3 bytes each
    CHECK(codepoint_count("a中b") == 3);
    CHECK(codepoint_count("naïve") == 5);
}

TEST_CASE("trim strips surrounding whitespace") {
    CHECK(trim("  a b  ") == "a b");
    CHECK(trim("\n\t x \r\n") == "x");
    CHECK(trim("   ") == "");
}

TEST_CASE("split_paragraphs on blank-line runs") {
    auto p = split_paragraphs("one\n\ntwo\n\n\nthree");
    REQUIRE(p.size() == 3);
    CHECK(p[0] == "one");
    CHECK(p[1] == "two");
    CHECK(p[2] == "three");

    CHECK(split_paragraphs("single paragraph\nwith two lines").size() == 1);
    CHECK(split_paragraphs("").empty());
    CHECK(split_paragraphs("  \n \n").empty());

    // a line of only spaces is a boundary
    auto q = split_paragraphs("a\n   \nb");
    REQUIRE(q.size() == 2);
}

TEST_CASE("paragraph splitting conserves text") {
    std::string original = "alpha beta\n\ngamma\n\ndelta epsilon";
    auto parts = split_paragraphs(original);
    std::string joined;
    for (const auto& p : parts) {
        if (!joined.empty()) joined += "\n\n";
        joined += p;
    }
    CHECK(joined == original);
}
