#include <doctest.h>

#include <filesystem>

#include "pic/claims.hpp"
#include "pic/errors.hpp"
#include "pic/prompts.hpp"

namespace fs = std::filesystem;
using namespace pic;

namespace {

VerifiableClaim mk(const std::string& id, const std::string& text) {
    VerifiableClaim c;
    c.id = id;
    c.text = text;
    return c;
}

ClaimSet set_of(std::vector<std::string> texts) {
    ClaimSet s;
    size_t i = 1;
    for (auto& t : texts) s.claims.push_back(mk("c" + std::to_string(i++), t));
    return s;
}

} // namespace

TEST_CASE("normalized_text canonicalizes comparisons") {
    CHECK(normalized_text("The Cat sat.") == "the cat sat");
    CHECK(normalized_text("  The   Cat\tsat.  ") == "the cat sat");
    CHECK(normalized_text("Really?") == "really");
    CHECK(normalized_text("Go!") == "go");
    // only one trailing terminator is stripped
    CHECK(normalized_text("Go!!") == "go!");
    // inner punctuation survives
    CHECK(normalized_text("U.S. policy changed.") == "u.s. policy changed");
    CHECK(normalized_text("") == "");
}

TEST_CASE("dedup_claims keeps first occurrence in order") {
    std::vector<VerifiableClaim> in = {
        mk("a", "Paris is in France."),
        mk("b", "Berlin is in Germany."),
        mk("c", "paris  is in FRANCE"),
        mk("d", "Berlin is in Germany!"),
        mk("e", "Rome is in Italy."),
    };
    auto out = dedup_claims(in);
    REQUIRE(out.size() == 3);
    CHECK(out.claims[0].id == "a");
    CHECK(out.claims[1].id == "b");
    CHECK(out.claims[2].id == "e");
    CHECK(out.provenance == Provenance::response_extracted);

    // idempotent
    auto again = dedup_claims(out.claims);
    CHECK(again.size() == 3);
}

TEST_CASE("validate_claim_set flags the three violation kinds") {
    SUBCASE("empty set") {
        ClaimSet empty;
        auto report = validate_claim_set(empty);
        REQUIRE(report.violations.size() == 1);
        CHECK(report.violations[0].kind == ViolationKind::empty_set);
        CHECK_FALSE(report.ok());
    }

    SUBCASE("duplicates by normalized text") {
        auto s = set_of({"The sky is blue.", "the  sky is BLUE"});
        auto report = validate_claim_set(s);
        REQUIRE(report.violations.size() == 1);
        CHECK(report.violations[0].kind == ViolationKind::duplicate);
        CHECK(report.violations[0].claim_ids == std::vector<std::string>{"c1", "c2"});
    }

    SUBCASE("clean set passes") {
        auto s = set_of({"One fact here.", "Another fact there."});
        CHECK(validate_claim_set(s).ok());
    }

    SUBCASE("contradiction check requires a judge") {
        auto s = set_of({"X was born in 1950.", "X was born in 1960."});
        ValidateOptions opts;
        opts.check_contradictions = true;
        CHECK_THROWS_AS(validate_claim_set(s, opts), ConfigError);
    }

    SUBCASE("contradictions via judge, unparseable verdicts become warnings") {
        auto s = set_of({"X was born in 1950.", "X was born in 1960.", "X is tall."});
        ValidateOptions opts;
        opts.check_contradictions = true;
        opts.judge = [](const std::string& a, const std::string& b) -> std::optional<bool> {
            if (a.find("1950") != std::string::npos && b.find("1960") != std::string::npos)
                return true;
            if (b.find("tall") != std::string::npos && a.find("1960") != std::string::npos)
                return std::nullopt; // judge answered garbage for this pair
            return false;
        };
        auto report = validate_claim_set(s, opts);
        REQUIRE(report.violations.size() == 1);
        CHECK(report.violations[0].kind == ViolationKind::contradiction);
        CHECK(report.violations[0].claim_ids == std::vector<std::string>{"c1", "c2"});
        CHECK(report.warnings.size() == 1);
    }
}

TEST_CASE("render_claim_list numbers from 1") {
    auto s = set_of({"First claim text.", "Second claim text."});
    CHECK(render_claim_list(s) == "1. First claim text.\n2. Second claim text.");
}

TEST_CASE("render_prompt produces the exact template bytes") {
    PicTask task;
    task.id = "t1";
    task.instruction = "Write about X.";
    task.claims = set_of({"X is a thing.", "X started in 1990."});

    SUBCASE("full mode") {
        task.mode = TaskMode::full;
        std::string expected(prompts::kFullTemplate);
        expected.replace(expected.find("{instruction}"), 13, task.instruction);
        expected.replace(expected.find("{claims}"), 8,
                         "1. X is a thing.\n2. X started in 1990.");
        CHECK(render_prompt(task) == expected);
        CHECK(render_prompt(task).find("**exactly all**") != std::string::npos);
    }

    SUBCASE("partial mode") {
        task.mode = TaskMode::partial;
        auto p = render_prompt(task);
        CHECK(p.find("**any subset**") != std::string::npos);
        CHECK(p.find("Do not introduce any new claims") != std::string::npos);
        CHECK(p.find("1. X is a thing.") != std::string::npos);
    }

    SUBCASE("empty claim set refuses") {
        task.claims = ClaimSet{};
        CHECK_THROWS_AS(render_prompt(task), PreconditionError);
    }
}

TEST_CASE("concat_claims_baseline") {
    auto s = set_of({"A is true.", "B is true."});
    CHECK(concat_claims_baseline(s) == "A is true. B is true.");
    CHECK(concat_claims_baseline(s, "\n") == "A is true.\nB is true.");
    CHECK_THROWS_AS(concat_claims_baseline(ClaimSet{}), PreconditionError);
}

TEST_CASE("task json codec round trip") {
    PicTask task;
    task.id = "t7";
    task.mode = TaskMode::partial;
    task.instruction = "Summarize.";
    task.claims = set_of({"Alpha happened.", "Beta happened."});
    task.gold_response = "Alpha happened.";
    task.word_limit = {40, 60};
    task.metadata["topic"] = "history";

    auto j = task_to_json(task);
    auto back = task_from_json(j);
    CHECK(back.id == "t7");
    CHECK(back.mode == TaskMode::partial);
    CHECK(back.instruction == "Summarize.");
    REQUIRE(back.claims.size() == 2);
    CHECK(back.claims.claims[0].text == "Alpha happened.");
    CHECK(back.gold_response == task.gold_response);
    REQUIRE(back.word_limit.has_value());
    CHECK(back.word_limit->first == 40);
    CHECK(back.word_limit->second == 60);
    CHECK(back.metadata.at("topic") == "history");
}

TEST_CASE("task json synthesizes claim ids and rejects junk") {
    nlohmann::json minimal{
        {"id", "t1"},
        {"mode", "full"},
        {"instruction", "Do it."},
        {"claims", nlohmann::json::array({nlohmann::json{{"text", "A fact here."}}})}};
    auto t = task_from_json(minimal);
    CHECK(t.mode == TaskMode::full);
    CHECK(t.claims.claims[0].id == "c1"); // synthesized id

    for (const char* missing : {"id", "mode", "instruction", "claims"}) {
        auto broken = minimal;
        broken.erase(missing);
        CHECK_THROWS_AS(task_from_json(broken), InputError);
    }
    CHECK_THROWS_AS(task_from_json(nlohmann::json::array()), InputError);
    CHECK_THROWS_AS(task_mode_from_string("sideways"), InputError);
    CHECK_THROWS_AS(claim_source_from_string("nope"), InputError);
    CHECK_THROWS_AS(provenance_from_string("nope"), InputError);
}

TEST_CASE("load_tasks / save_tasks") {
    auto dir = fs::temp_directory_path() / "pic_claims_io";
    fs::create_directories(dir);
    auto p = dir / "tasks.jsonl";

    PicTask a;
    a.id = "a";
    a.instruction = "One.";
    a.claims = set_of({"Fact one stands."});
    PicTask b;
    b.id = "b";
    b.mode = TaskMode::partial;
    b.instruction = "Two.";
    b.claims = set_of({"Fact two stands."});

    save_tasks(p, {a, b});
    auto loaded = load_tasks(p);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].id == "a");
    CHECK(loaded[1].mode == TaskMode::partial);
    fs::remove_all(dir);
}
