#include <doctest.h>

#include <mutex>

#include "pic/extraction.hpp"
#include "pic/gateway.hpp"
#include "pic/mock_behaviors.hpp"

using namespace pic;

namespace {

std::vector<std::string> texts(const std::vector<SentenceSpan>& spans) {
    std::vector<std::string> out;
    for (const auto& s : spans) out.push_back(s.text);
    return out;
}

} // namespace

TEST_CASE("segmentation: plain sentences") {
    auto s = segment_sentences("First one. Second one! Third one?");
    CHECK(s == std::vector<std::string>{"First one.", "Second one!", "Third one?"});
}

TEST_CASE("segmentation: abbreviations do not split") {
    auto s = segment_sentences("Dr. Smith arrived. He met Prof. Jones at St. Mary's.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "Dr. Smith arrived.");
    CHECK(s[1] == "He met Prof. Jones at St. Mary's.");

    s = segment_sentences("The U.S. economy grew. Inflation fell.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "The U.S. economy grew.");
}

TEST_CASE("segmentation: decimals and numbered items survive") {
    auto s = segment_sentences("Growth hit 3.5 percent. Costs fell.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "Growth hit 3.5 percent.");
}

TEST_CASE("segmentation: quotes and parentheses hold sentences together") {
    auto s = segment_sentences("She said \"stop. now.\" and left. Then silence.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "She said \"stop. now.\" and left.");
    CHECK(s[1] == "Then silence.");

    s = segment_sentences("The result (p < 0.05! surprising) held. Next claim.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "The result (p < 0.05! surprising) held.");
}

TEST_CASE("segmentation: terminator inside closing quote ends the sentence") {
    auto s = segment_sentences("He shouted \"run!\" Everyone ran.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "He shouted \"run!\"");
    CHECK(s[1] == "Everyone ran.");
}

TEST_CASE("segmentation: spans index the original text") {
    std::string text = "  One here.   Two there. ";
    auto spans = segment_with_spans(text);
    REQUIRE(spans.size() == 2);
    for (const auto& sp : spans) {
        CHECK(text.substr(sp.begin, sp.end - sp.begin) == sp.text);
    }
    CHECK(spans[0].text == "One here.");
    CHECK(spans[1].text == "Two there.");
}

TEST_CASE("segmentation: no trailing terminator still flushes") {
    auto s = segment_sentences("Unterminated trailing text");
    REQUIRE(s.size() == 1);
    CHECK(s[0] == "Unterminated trailing text");
    CHECK(segment_sentences("").empty());
    CHECK(segment_sentences("   \n\t ").empty());
}

TEST_CASE("make_windows links prev/focus/next in order") {
    auto spans = segment_with_spans("A one. B two. C three.");
    auto w = make_windows(spans);
    REQUIRE(w.size() == 3);
    CHECK(w[0].prev == "");
    CHECK(w[0].focus == "A one.");
    CHECK(w[0].next == "B two.");
    CHECK(w[1].prev == "A one.");
    CHECK(w[1].next == "C three.");
    CHECK(w[2].prev == "B two.");
    CHECK(w[2].next == "");
    CHECK(w[1].focus_span.begin == spans[1].begin);
}

TEST_CASE("parse_claim_lines") {
    CHECK(parse_claim_lines("- Paris is the capital of France.\n- The Seine crosses it.") ==
          std::vector<std::string>{"Paris is the capital of France.",
                                   "The Seine crosses it."});
    // "None" in any case means no claims
    CHECK(parse_claim_lines("None").empty());
    CHECK(parse_claim_lines("none\n").empty());
    // sub-3-word lines are noise, bullets optional
    CHECK(parse_claim_lines("Yes.\nShort line\nA real claim here.") ==
          std::vector<std::string>{"A real claim here."});
    CHECK(parse_claim_lines("").empty());
}

TEST_CASE("extract_claims: happy path through the rule extractor") {
    Gateway gw({.sleeper = [](int) {}});
    BackendProfile p;
    p.id = "ext";
    gw.add_profile(p, make_mock_backend("rule_extractor"));

    auto out = extract_claims(gw, "ext",
                              "Alice founded Acme in 1990. The company sells rockets.");
    CHECK(out.windows == 2);
    REQUIRE(out.claims.size() == 2);
    CHECK(out.claims.claims[0].text == "Alice founded Acme in 1990.");
    CHECK(out.claims.claims[0].id == "w0c0");
    CHECK(out.claims.claims[1].text == "The company sells rockets.");
    CHECK(out.claims.claims[0].source == ClaimSource::extracted);
    REQUIRE(out.claims.claims[0].span.has_value());
    CHECK(out.claims.claims[0].span->begin == 0);
    CHECK(out.warnings.empty());
    CHECK(out.claims.provenance == Provenance::response_extracted);
}

TEST_CASE("extract_claims: duplicate claims collapse across windows") {
    Gateway gw({.sleeper = [](int) {}});
    BackendProfile p;
    p.id = "ext";
    gw.add_profile(p, make_mock_backend("rule_extractor"));
    auto out =
        extract_claims(gw, "ext", "The sky is blue. The sky is blue. The sea is green.");
    CHECK(out.windows == 3);
    CHECK(out.claims.size() == 2);
}

TEST_CASE("extract_claims: empty text yields an empty set, no calls") {
    Gateway gw({.sleeper = [](int) {}});
    BackendProfile p;
    p.id = "ext";
    auto backend = make_mock_backend("rule_extractor");
    gw.add_profile(p, backend);
    auto out = extract_claims(gw, "ext", "   ");
    CHECK(out.windows == 0);
    CHECK(out.claims.empty());
    CHECK(backend->calls() == 0);
}

TEST_CASE("extract_claims: a failing window degrades to a warning") {
    GatewayOptions opts;
    opts.sleeper = [](int) {};
    opts.retry_budget = 0;
    Gateway gw(opts);
    BackendProfile p;
    p.id = "ext";
    auto backend = make_mock_backend("rule_extractor");
    backend->push_faults({{500}});
    gw.add_profile(p, backend);

    ExtractOptions xo;
    xo.max_parallel = 1; // deterministic fault placement: first window fails
    auto out = extract_claims(gw, "ext", "First fact stands. Second fact stands.", xo);
    CHECK(out.claims.size() == 1);
    CHECK(out.claims.claims[0].text == "Second fact stands.");
    REQUIRE(out.warnings.size() == 1);
    CHECK(out.warnings[0].find("window 0") != std::string::npos);
}

TEST_CASE("extract_claims: prompt carries the window and the (none) edges") {
    std::vector<std::string> prompts;
    std::mutex mu;
    Gateway gw({.sleeper = [](int) {}});
    BackendProfile p;
    p.id = "ext";
    gw.add_profile(p, std::make_shared<MockBackend>(
                          [&](const std::string& prompt, const DecodeParams&) {
                              std::lock_guard lock(mu);
                              prompts.push_back(prompt);
                              return std::string("None");
                          }));
    ExtractOptions xo;
    xo.max_parallel = 1;
    auto out = extract_claims(gw, "ext", "Only one sentence here.", xo);
    CHECK(out.claims.empty());
    CHECK(out.warnings.empty()); // a clean "None" is not a warning
    REQUIRE(prompts.size() == 1);
    CHECK(prompts[0].find("Previous sentence: (none)") != std::string::npos);
    CHECK(prompts[0].find("Focus sentence: Only one sentence here.") != std::string::npos);
    CHECK(prompts[0].find("Next sentence: (none)") != std::string::npos);
    CHECK(prompts[0].rfind("Claims:") == prompts[0].size() - 7);
}

TEST_CASE("extract_claims: unparseable completions warn") {
    Gateway gw({.sleeper = [](int) {}});
    BackendProfile p;
    p.id = "ext";
    gw.add_profile(p, make_mock_backend("static_text", {{"text", "??"}}));
    auto out = extract_claims(gw, "ext", "A sentence that makes a claim.");
    CHECK(out.claims.empty());
    REQUIRE(out.warnings.size() == 1);
    CHECK(out.warnings[0].find("no parseable claims") != std::string::npos);
}
