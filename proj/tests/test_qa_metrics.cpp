#include <doctest.h>

#include "pic/errors.hpp"
#include "pic/qa_metrics.hpp"

using namespace pic;

TEST_CASE("normalize_answer frozen against the reference normalizer") {
    // Each pair was produced by the canonical SQuAD normalization (lowercase,
    // strip ASCII punctuation, drop whole-word articles, collapse whitespace,
    // in that order) and is asserted byte-for-byte.
    CHECK(normalize_answer("The Bellagio!") == "bellagio");
    CHECK(normalize_answer("October 15, 1998") == "october 15 1998");
    CHECK(normalize_answer("") == "");
    CHECK(normalize_answer("A Midsummer Night's Dream") == "midsummer nights dream");
    CHECK(normalize_answer("  An   Apple a Day  ") == "apple day");
    CHECK(normalize_answer("U.S.A.") == "usa");
    // punctuation is stripped before article matching: "the-quick" fuses
    CHECK(normalize_answer("the-quick brown_fox") == "thequick brownfox");
    CHECK(normalize_answer("Theatre of the Absurd") == "theatre of absurd");
    CHECK(normalize_answer("a") == "");
    CHECK(normalize_answer("THE THE THE") == "");
    CHECK(normalize_answer("it's a trap!") == "its trap");
    CHECK(normalize_answer("semi-final (2nd leg)") == "semifinal 2nd leg");
}

TEST_CASE("em_recall on the two-group construction fixture") {
    std::vector<std::vector<std::string>> gold = {{"May 1996"}, {"October 15, 1998"}};

    // covers only the opening date group
    CHECK(em_recall(
              "The Bellagio in Las Vegas was built and officially opened on October 15, "
              "1998.",
              gold) == doctest::Approx(0.5));

    // covers both groups
    CHECK(em_recall("The Bellagio in Las Vegas was constructed beginning in May 1996 and "
                    "it opened on October 15, 1998.",
                    gold) == doctest::Approx(1.0));
}

TEST_CASE("em_recall alias groups and substring semantics") {
    std::vector<std::vector<std::string>> gold = {{"NYC", "New York City"},
                                                  {"Los Angeles", "LA"}};
    // any alias covers its group
    CHECK(em_recall("She moved to New York City.", gold) == doctest::Approx(0.5));
    CHECK(em_recall("She moved to NYC and then LA.", gold) == doctest::Approx(1.0));
    CHECK(em_recall("She stayed home.", gold) == 0.0);

    // matching happens after normalization on both sides
    CHECK(em_recall("she moved to NEW YORK CITY!", gold) == doctest::Approx(0.5));
    // punctuation is removed without inserting spaces, so the hyphenated form
    // fuses into "newyorkcity" and no longer contains the alias
    CHECK(em_recall("she moved to new-york-city", gold) == 0.0);

    // adding text never lowers recall (monotone in response content)
    std::string base = "Answer: New York City.";
    double r1 = em_recall(base, gold);
    double r2 = em_recall(base + " Plus plenty of extra unrelated words.", gold);
    CHECK(r2 >= r1);

    CHECK_THROWS_AS(em_recall("anything", {}), PreconditionError);
}

TEST_CASE("em_recall ignores aliases that normalize to nothing") {
    // "The" normalizes to ""; an empty alias must not match everything
    std::vector<std::vector<std::string>> gold = {{"The"}, {"Paris"}};
    CHECK(em_recall("Paris is lovely.", gold) == doctest::Approx(0.5));
}

TEST_CASE("qampari_metrics core case") {
    // 5 gold groups, 4 predictions, 2 of them matching distinct groups
    std::vector<std::vector<std::string>> gold = {
        {"Alpha"}, {"Beta"}, {"Gamma"}, {"Delta"}, {"Epsilon"}};
    auto s = qampari_metrics({"Alpha", "Gamma", "Zeta", "Eta"}, gold, 5);
    CHECK(s.correct == 2);
    CHECK(s.precision == doctest::Approx(0.5));
    CHECK(s.recall_at_k == doctest::Approx(0.4));
    CHECK(s.f1_at_k == doctest::Approx(2.0 * 0.5 * 0.4 / 0.9));
}

TEST_CASE("qampari_metrics credits each group once") {
    std::vector<std::vector<std::string>> gold = {{"Alpha", "The Alpha"}, {"Beta"}};
    // two predictions hitting the same group: only one counts
    auto s = qampari_metrics({"Alpha", "The Alpha", "Gamma"}, gold, 5);
    CHECK(s.correct == 1);
    CHECK(s.precision == doctest::Approx(1.0 / 3.0));
    CHECK(s.recall_at_k == doctest::Approx(0.5));
}

TEST_CASE("qampari_metrics maximum matching beats greedy") {
    // "Birch" matches groups 1 and 2; "Ash" matches only group 1. Greedy
    // that sends "Birch" to group 1 strands "Ash"; the matcher must find both.
    std::vector<std::vector<std::string>> gold = {{"Ash", "Birch"}, {"Birch", "Cedar"}};
    auto s = qampari_metrics({"Birch", "Ash"}, gold, 5);
    CHECK(s.correct == 2);
    CHECK(s.precision == doctest::Approx(1.0));
    CHECK(s.recall_at_k == doctest::Approx(1.0));
    CHECK(s.f1_at_k == doctest::Approx(1.0));
}

TEST_CASE("qampari recall cap uses min(k, gold size)") {
    std::vector<std::vector<std::string>> gold = {{"Ash"},  {"Birch"}, {"Cedar"},
                                                  {"Dune"}, {"Elm"},   {"Fir"},
                                                  {"Grove"}, {"Hazel"}};
    // 5 correct out of 8 groups with k=5: recall@5 = 1.0
    auto s = qampari_metrics({"Ash", "Birch", "Cedar", "Dune", "Elm"}, gold, 5);
    CHECK(s.recall_at_k == doctest::Approx(1.0));
    CHECK(s.precision == doctest::Approx(1.0));

    // 2 gold groups with k=5: denominator is 2
    std::vector<std::vector<std::string>> small = {{"Ash"}, {"Birch"}};
    s = qampari_metrics({"Ash"}, small, 5);
    CHECK(s.recall_at_k == doctest::Approx(0.5));
}

TEST_CASE("qampari edge cases") {
    std::vector<std::vector<std::string>> gold = {{"Ash"}};
    auto s = qampari_metrics({}, gold, 5);
    CHECK(s.precision == 0.0);
    CHECK(s.recall_at_k == 0.0);
    CHECK(s.f1_at_k == 0.0);

    CHECK_THROWS_AS(qampari_metrics({"Ash"}, {}, 5), PreconditionError);
    CHECK_THROWS_AS(qampari_metrics({"Ash"}, gold, 0), PreconditionError);

    // exact match, not substring: "Aler" must not match "Aler Dale"
    std::vector<std::vector<std::string>> g2 = {{"Aler Dale"}};
    CHECK(qampari_metrics({"Aler"}, g2, 5).correct == 0);
    // but normalization applies: case and punctuation are forgiven
    CHECK(qampari_metrics({"aler dale."}, g2, 5).correct == 1);
}

TEST_CASE("parse_answer_list splits numbered, bulleted, comma forms") {
    CHECK(parse_answer_list("1. Alpha\n2. Beta\n3) Gamma") ==
          std::vector<std::string>{"Alpha", "Beta", "Gamma"});
    CHECK(parse_answer_list("- Alpha\n- Beta") ==
          std::vector<std::string>{"Alpha", "Beta"});
    CHECK(parse_answer_list("Alpha, Beta, Gamma.") ==
          std::vector<std::string>{"Alpha", "Beta", "Gamma"});
    CHECK(parse_answer_list("1. Alpha, Beta\n2. Gamma") ==
          std::vector<std::string>{"Alpha", "Beta", "Gamma"});
    CHECK(parse_answer_list("").empty());
    CHECK(parse_answer_list("  \n \n").empty());
}
