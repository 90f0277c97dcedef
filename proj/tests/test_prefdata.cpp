#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "pic/errors.hpp"
#include "pic/mock_behaviors.hpp"
#include "pic/prefdata.hpp"

using namespace pic;

namespace {

ClaimSet set_of(std::vector<std::string> texts) {
    ClaimSet s;
    size_t i = 1;
    for (auto& t : texts) {
        VerifiableClaim c;
        c.id = "c" + std::to_string(i++);
        c.text = t;
        s.claims.push_back(std::move(c));
    }
    return s;
}

ClaimSet numbered_claims(size_t k) {
    std::vector<std::string> texts;
    for (size_t i = 1; i <= k; ++i)
        texts.push_back("Fact number " + std::to_string(i) + " holds true.");
    return set_of(texts);
}

std::vector<TokenLogprob> lps(std::vector<double> values) {
    std::vector<TokenLogprob> out;
    for (double v : values) out.push_back({"t", v});
    return out;
}

// One multi-word sentence padded to an exact byte length.
std::string sentence_of_length(size_t len) {
    std::string s = "This golden response keeps stating many verifiable facts";
    if (s.size() > len - 1) s = s.substr(0, len - 1);
    while (s.size() + 1 < len) s += "y";
    s += ".";
    return s;
}

void add_stack_profiles(Gateway& gw, nlohmann::json verifier_cfg = nlohmann::json::object()) {
    BackendProfile m;
    m.id = "sft";
    m.capabilities = {Capability::complete, Capability::score_logprobs};
    gw.add_profile(m, make_mock_backend("identity_model"));
    BackendProfile x;
    x.id = "extractor";
    gw.add_profile(x, make_mock_backend("rule_extractor"));
    BackendProfile v;
    v.id = "verifier";
    gw.add_profile(v, make_mock_backend("containment_verifier", verifier_cfg));
}

} // namespace

TEST_CASE("filter thresholds by family") {
    CHECK(filter_threshold(TaskFamily::general) == 1.0);
    CHECK(filter_threshold(TaskFamily::biography) == 0.9);
    CHECK(filter_threshold(TaskFamily::summarization) == 1.0);
    CHECK(filter_threshold(TaskFamily::qa) == 1.0);
}

TEST_CASE("convert_and_filter drop reasons") {
    Gateway gw({.sleeper = [](int) {}});
    add_stack_profiles(gw);
    EvalProfiles profiles{"extractor", "verifier"};

    RawSample raw;
    raw.id = "r1";
    raw.instruction = "Write about the topic.";

    SUBCASE("missing gold") {
        auto out = convert_and_filter(gw, profiles, raw);
        CHECK(out.reason == DropReason::missing_gold);
        CHECK_FALSE(out.sample.has_value());
    }

    SUBCASE("length gate sits exactly at 128 characters") {
        raw.gold_response = sentence_of_length(127);
        CHECK(convert_and_filter(gw, profiles, raw).reason == DropReason::too_short);

        raw.gold_response = sentence_of_length(128);
        auto out = convert_and_filter(gw, profiles, raw);
        CHECK(out.reason == DropReason::none); // one claim, identity-supported
        REQUIRE(out.sample.has_value());
        CHECK(out.sample->response.size() == 128);
    }

    SUBCASE("no claims") {
        // every sentence under three words parses to nothing
        std::string short_words;
        while (short_words.size() < 140) short_words += "Ok no. ";
        raw.gold_response = short_words;
        auto out = convert_and_filter(gw, profiles, raw);
        CHECK(out.reason == DropReason::no_claims);
    }

    SUBCASE("partial mode requires context") {
        raw.mode = TaskMode::partial;
        raw.gold_response = sentence_of_length(140);
        auto out = convert_and_filter(gw, profiles, raw);
        CHECK(out.reason == DropReason::missing_context);
    }

    SUBCASE("retained full-mode sample carries gold-derived claims") {
        raw.gold_response =
            "Alice founded Acme Corporation in March 1990 in Dover. The company builds "
            "reusable orbital rockets. It employs just over four hundred people today.";
        REQUIRE(raw.gold_response->size() >= kMinResponseChars);
        auto out = convert_and_filter(gw, profiles, raw);
        CHECK(out.reason == DropReason::none);
        REQUIRE(out.sample.has_value());
        CHECK(out.sample->claims.size() == 3);
        CHECK(out.sample->claims.provenance == Provenance::gold_derived);
        CHECK(out.sample->claims.claims[0].source == ClaimSource::gold_response);
        CHECK(out.sample->response == *raw.gold_response);
        CHECK(out.sample->pic_score_at_filter == 1.0);
        CHECK(out.score == 1.0);
    }
}

TEST_CASE("convert_and_filter score gate: general drops what biography keeps") {
    // The verifier marks any claim containing the marker as unsupported, so
    // one of the ten sentences fails both directions: F1 = 0.9.
    Gateway gw({.sleeper = [](int) {}});
    add_stack_profiles(gw, {{"unsupported_marker", "zzq"}});
    EvalProfiles profiles{"extractor", "verifier"};

    std::string gold;
    for (int i = 1; i <= 9; ++i)
        gold += "Verified fact number " + std::to_string(i) + " stands firmly here. ";
    gold += "The zzq outlier claim fails verification today.";
    REQUIRE(gold.size() >= kMinResponseChars);

    RawSample raw;
    raw.id = "r1";
    raw.instruction = "Write about the topic.";
    raw.gold_response = gold;

    raw.family = TaskFamily::general;
    auto general = convert_and_filter(gw, profiles, raw);
    CHECK(general.reason == DropReason::low_score);
    CHECK(general.score == doctest::Approx(0.9));

    raw.family = TaskFamily::biography;
    auto bio = convert_and_filter(gw, profiles, raw);
    CHECK(bio.reason == DropReason::none);
    REQUIRE(bio.sample.has_value());
    CHECK(bio.sample->pic_score_at_filter == doctest::Approx(0.9));
}

TEST_CASE("perturb_claims: k <= 1 is identity") {
    PerturbParams params;
    params.seed = 5;
    Rng rng(1);

    ClaimSet one = numbered_claims(1);
    auto r = perturb_claims(one, params, rng);
    CHECK(r.perturbed.size() == 1);
    CHECK(r.dropped_claim_ids.empty());
    CHECK(r.perturbed.claims[0].id == "c1");

    auto e = perturb_claims(ClaimSet{}, params, rng);
    CHECK(e.perturbed.empty());
}

TEST_CASE("perturb_claims: bounds and survivor order") {
    PerturbParams params; // p_min 0.1, p_max 0.5
    for (size_t k : {2, 3, 5, 10, 37}) {
        for (uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(seed);
            auto claims = numbered_claims(k);
            auto r = perturb_claims(claims, params, rng);
            size_t m = r.dropped_claim_ids.size();
            CHECK(m >= 1);
            CHECK(m <= k - 1);
            CHECK(r.perturbed.size() + m == k);

            size_t upper = std::max<size_t>(
                1, static_cast<size_t>(std::floor(params.p_max * double(k))));
            size_t lower = std::max<size_t>(
                1, static_cast<size_t>(std::floor(params.p_min * double(k))));
            if (lower > upper) lower = upper;
            CHECK(m >= lower);
            CHECK(m <= upper);

            // survivors keep input order and really come from the input
            size_t last = 0;
            for (const auto& c : r.perturbed.claims) {
                size_t n = std::stoul(c.id.substr(1));
                CHECK(n > last);
                last = n;
            }
        }
    }
}

TEST_CASE("perturb_claims: same rng seed, same outcome") {
    PerturbParams params;
    auto claims = numbered_claims(8);
    Rng a(99), b(99);
    auto ra = perturb_claims(claims, params, a);
    auto rb = perturb_claims(claims, params, b);
    CHECK(ra.dropped_claim_ids == rb.dropped_claim_ids);
}

TEST_CASE("perturb_claims: parameter validation") {
    auto claims = numbered_claims(4);
    Rng rng(0);
    PerturbParams bad;
    bad.p_min = 0.0;
    CHECK_THROWS_AS(perturb_claims(claims, bad, rng), ConfigError);
    bad = {};
    bad.p_min = 0.6;
    bad.p_max = 0.5;
    CHECK_THROWS_AS(perturb_claims(claims, bad, rng), ConfigError);
    bad = {};
    bad.tau = 1.5;
    CHECK_THROWS_AS(perturb_claims(claims, bad, rng), ConfigError);
    bad = {};
    bad.last_l = 0;
    CHECK_THROWS_AS(perturb_claims(claims, bad, rng), ConfigError);
}

TEST_CASE("mean_last_l windows from the tail") {
    auto toks = lps({-1.0, -2.0, -3.0});
    CHECK(mean_last_l(toks, 2) == doctest::Approx(-2.5));
    CHECK(mean_last_l(toks, 3) == doctest::Approx(-2.0));
    CHECK(mean_last_l(toks, 20) == doctest::Approx(-2.0)); // clamps to length
    CHECK(mean_last_l(toks, 1) == doctest::Approx(-3.0));
    CHECK_THROWS_AS(mean_last_l({}, 5), PreconditionError);
    CHECK_THROWS_AS(mean_last_l(toks, 0), PreconditionError);
}

TEST_CASE("normalized_drop analytics") {
    auto orig = lps({-1.0, -1.0, -1.0});
    auto pert = lps({-2.0, -2.0, -2.0});

    // equal likelihoods sit exactly on 0.5
    CHECK(normalized_drop(orig, orig, 20) == 0.5);

    // the perturbed response being less likely pushes z above 0.5
    double z = normalized_drop(orig, pert, 20);
    CHECK(z == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
    CHECK(z > 0.5);

    // antisymmetry
    CHECK(normalized_drop(orig, pert, 20) + normalized_drop(pert, orig, 20) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // strictly increasing in the gap
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
        double gap = -5.0 + 0.1 * i;
        double zi = normalized_drop(lps({gap}), lps({0.0}), 20);
        CHECK(zi > prev);
        prev = zi;
    }
}

TEST_CASE("build_preference: no contrast when the regeneration matches") {
    Gateway gw({.sleeper = [](int) {}});
    BackendProfile sft;
    sft.id = "sft";
    gw.add_profile(sft, make_mock_backend("static_text", {{"text", "Same response."}}));
    BackendProfile ref;
    ref.id = "ref";
    ref.capabilities = {Capability::complete, Capability::score_logprobs};
    gw.add_profile(ref, make_mock_backend("identity_model"));

    SftSample sample;
    sample.id = "s1";
    sample.instruction = "Write.";
    sample.claims = numbered_claims(4);
    sample.response = "Same response.";

    PerturbParams params;
    auto out = build_preference(gw, {"sft", "ref"}, sample, params);
    CHECK(out.skip == PrefSkipReason::no_contrast);
    CHECK_FALSE(out.tuple.has_value());
}

TEST_CASE("build_preference: tau endpoints pin the branch") {
    Gateway gw({.sleeper = [](int) {}});
    BackendProfile sft;
    sft.id = "sft";
    gw.add_profile(sft, make_mock_backend("identity_model"));
    BackendProfile ref;
    ref.id = "ref";
    ref.capabilities = {Capability::complete, Capability::score_logprobs};
    gw.add_profile(ref, make_mock_backend("identity_model", {{"logprob_mode", "hashed"}}));

    SftSample sample;
    sample.id = "s1";
    sample.instruction = "Write the facts.";
    sample.mode = TaskMode::full;
    sample.claims = numbered_claims(6);
    sample.response = "A distinctly original response that the regeneration cannot equal.";

    PerturbParams params;
    params.tau = 0.0;
    auto low = build_preference(gw, {"sft", "ref"}, sample, params);
    REQUIRE(low.tuple.has_value());
    CHECK(low.tuple->branch == PrefBranch::original_preferred);
    CHECK(low.tuple->chosen == sample.response);
    CHECK(low.tuple->claims.size() == 6);
    CHECK(low.tuple->drop_score > 0.0);
    CHECK(low.tuple->drop_score < 1.0);
    CHECK_FALSE(low.tuple->dropped_claim_ids.empty());

    params.tau = 1.0;
    auto high = build_preference(gw, {"sft", "ref"}, sample, params);
    REQUIRE(high.tuple.has_value());
    CHECK(high.tuple->branch == PrefBranch::perturbed_preferred);
    CHECK(high.tuple->rejected == sample.response);
    CHECK(high.tuple->chosen != sample.response);
    // the perturbed branch carries the perturbed claim set
    CHECK(high.tuple->claims.size() == 6 - high.tuple->dropped_claim_ids.size());
    // same seed, same perturbation on both runs
    CHECK(high.tuple->dropped_claim_ids == low.tuple->dropped_claim_ids);
    CHECK(high.tuple->drop_score == low.tuple->drop_score);
}

TEST_CASE("build_preference: constant-logprob reference lands exactly on 0.5") {
    Gateway gw({.sleeper = [](int) {}});
    BackendProfile sft;
    sft.id = "sft";
    gw.add_profile(sft, make_mock_backend("identity_model"));
    BackendProfile ref;
    ref.id = "ref";
    ref.capabilities = {Capability::complete, Capability::score_logprobs};
    gw.add_profile(ref, make_mock_backend("identity_model", {{"logprob_mode", "constant"},
                                                             {"logprob_value", -1.0}}));

    SftSample sample;
    sample.id = "s1";
    sample.instruction = "Write the facts.";
    sample.claims = numbered_claims(5);
    sample.response = "An original response that the identity regeneration will not equal.";

    PerturbParams params;
    params.tau = 0.5; // strict comparison: 0.5 > 0.5 is false
    auto out = build_preference(gw, {"sft", "ref"}, sample, params);
    REQUIRE(out.tuple.has_value());
    CHECK(out.tuple->drop_score == 0.5);
    CHECK(out.tuple->branch == PrefBranch::perturbed_preferred);

    params.tau = 0.3;
    auto out2 = build_preference(gw, {"sft", "ref"}, sample, params);
    REQUIRE(out2.tuple.has_value());
    CHECK(out2.tuple->branch == PrefBranch::original_preferred);
}

TEST_CASE("sft and pref json codecs") {
    SftSample s;
    s.id = "s3";
    s.instruction = "Do.";
    s.claims = numbered_claims(2);
    s.response = "The response body.";
    s.family = TaskFamily::biography;
    s.mode = TaskMode::partial;
    auto j = sft_to_json(s);
    auto back = sft_from_json(j, 0);
    CHECK(back.id == "s3");
    CHECK(back.family == TaskFamily::biography);
    CHECK(back.mode == TaskMode::partial);
    CHECK(back.claims.size() == 2);
    CHECK(back.response == s.response);

    // id synthesis from the record index
    auto anon = sft_from_json(nlohmann::json{{"instruction", "I."},
                                             {"claims", nlohmann::json::array()},
                                             {"response", "R."}},
                              4);
    CHECK(anon.id == "s5");

    PrefTuple t;
    t.id = "p1";
    t.instruction = "I.";
    t.claims = numbered_claims(1);
    t.chosen = "good";
    t.rejected = "bad";
    t.drop_score = 0.75;
    t.branch = PrefBranch::original_preferred;
    t.dropped_claim_ids = {"c9"};
    auto pj = pref_to_json(t);
    CHECK(pj.at("branch") == "original_preferred");
    CHECK(pj.at("chosen") == "good");
    CHECK(pj.at("drop_score") == doctest::Approx(0.75));
    CHECK(pj.at("dropped_claim_ids")[0] == "c9");

    RawSample r = raw_from_json(nlohmann::json{{"instruction", "Q."},
                                               {"response", "A."},
                                               {"family", "qa"},
                                               {"mode", "partial"}},
                                0);
    CHECK(r.id == "r1");
    CHECK(r.family == TaskFamily::qa);
    CHECK(r.mode == TaskMode::partial);
    REQUIRE(r.gold_response.has_value());
    CHECK_THROWS_AS(raw_from_json(nlohmann::json{{"response", "A."}}, 0), InputError);
}
