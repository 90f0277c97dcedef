#include <doctest.h>

#include "pic/metrics.hpp"
#include "pic/report.hpp"

using namespace pic;

namespace {

ScoreRow row(const std::string& id, TaskMode mode, size_t S, size_t N, size_t covered,
             size_t k) {
    return {id, mode, compute_pic_score(S, N, covered, k)};
}

} // namespace

TEST_CASE("eval_report_json: mixed modes report per-group and mode_primary overall") {
    std::vector<ScoreRow> rows{
        row("t1", TaskMode::full, 2, 0, 2, 2),    // f1 1.0
        row("t2", TaskMode::full, 1, 1, 1, 2),    // f1 0.5
        row("t3", TaskMode::partial, 3, 0, 1, 5), // precision 1.0
        row("t4", TaskMode::partial, 0, 0, 0, 5), // degenerate: no precision
    };
    auto report = eval_report_json(rows, 400, 42);
    const auto& groups = report.at("groups");

    const auto& full = groups.at("full");
    CHECK(full.at("metric") == "f1_at_k");
    CHECK(full.at("n") == 2);
    CHECK(full.at("excluded_degenerate") == 0);
    CHECK(full.at("mean_metric").get<double>() == doctest::Approx(0.75));
    CHECK(full.at("perfect_proportion").get<double>() == doctest::Approx(0.5));
    CHECK(full.at("replicates") == 400);
    CHECK(full.at("seed") == 42);
    CHECK(full.at("ci_low").get<double>() <= 0.75);
    CHECK(full.at("ci_high").get<double>() >= 0.75);

    // the degenerate partial row is excluded from the mean but not from n or
    // the perfect denominator
    const auto& partial = groups.at("partial");
    CHECK(partial.at("metric") == "precision");
    CHECK(partial.at("n") == 2);
    CHECK(partial.at("excluded_degenerate") == 1);
    CHECK(partial.at("mean_metric").get<double>() == doctest::Approx(1.0));
    CHECK(partial.at("perfect_proportion").get<double>() == doctest::Approx(0.5));

    const auto& overall = groups.at("overall");
    CHECK(overall.at("metric") == "mode_primary");
    CHECK(overall.at("n") == 4);
    CHECK(overall.at("excluded_degenerate") == 1);
    CHECK(overall.at("mean_metric").get<double>() == doctest::Approx(2.5 / 3.0));
    CHECK(overall.at("perfect_proportion").get<double>() == doctest::Approx(0.5));
}

TEST_CASE("eval_report_json: single-mode inputs name the overall metric directly") {
    std::vector<ScoreRow> full_only{row("t1", TaskMode::full, 1, 0, 1, 1)};
    auto r1 = eval_report_json(full_only, 100, 0);
    CHECK(r1.at("groups").contains("full"));
    CHECK_FALSE(r1.at("groups").contains("partial"));
    CHECK(r1.at("groups").at("overall").at("metric") == "f1_at_k");

    std::vector<ScoreRow> partial_only{row("t1", TaskMode::partial, 1, 0, 1, 3)};
    auto r2 = eval_report_json(partial_only, 100, 0);
    CHECK_FALSE(r2.at("groups").contains("full"));
    CHECK(r2.at("groups").at("overall").at("metric") == "precision");
}

TEST_CASE("eval_report_json: all-degenerate group has null mean and CI") {
    std::vector<ScoreRow> rows{row("t1", TaskMode::partial, 0, 0, 0, 4),
                               row("t2", TaskMode::partial, 0, 0, 0, 4)};
    auto report = eval_report_json(rows, 100, 0);
    const auto& partial = report.at("groups").at("partial");
    CHECK(partial.at("n") == 2);
    CHECK(partial.at("excluded_degenerate") == 2);
    CHECK(partial.at("mean_metric").is_null());
    CHECK(partial.at("ci_low").is_null());
    CHECK(partial.at("ci_high").is_null());
    CHECK(partial.at("perfect_proportion").get<double>() == doctest::Approx(0.0));
}

TEST_CASE("eval_report_json is deterministic for a fixed seed") {
    std::vector<ScoreRow> rows{row("a", TaskMode::full, 3, 1, 2, 4),
                               row("b", TaskMode::full, 1, 2, 1, 4),
                               row("c", TaskMode::full, 4, 0, 4, 4)};
    CHECK(eval_report_json(rows, 500, 7).dump() == eval_report_json(rows, 500, 7).dump());
    CHECK(eval_report_json(rows, 500, 7).dump() != eval_report_json(rows, 500, 8).dump());
}

TEST_CASE("metric_summary_json aggregates a plain value column") {
    auto j = metric_summary_json("em", {1.0, 1.0, 1.0}, 200, 3);
    CHECK(j.at("metric") == "em");
    CHECK(j.at("n") == 3);
    CHECK(j.at("excluded_degenerate") == 0);
    CHECK(j.at("mean_metric").get<double>() == doctest::Approx(1.0));
    CHECK(j.at("perfect_proportion").get<double>() == doctest::Approx(1.0));
    // all-equal values give a zero-width interval
    CHECK(j.at("ci_low").get<double>() == doctest::Approx(1.0));
    CHECK(j.at("ci_high").get<double>() == doctest::Approx(1.0));

    auto empty = metric_summary_json("em", {}, 200, 3);
    CHECK(empty.at("n") == 0);
    CHECK(empty.at("mean_metric").is_null());
    CHECK(empty.at("perfect_proportion").get<double>() == doctest::Approx(0.0));
}

TEST_CASE("report_markdown renders fixed four-decimal cells and n/a") {
    nlohmann::json report{
        {"groups",
         {{"alpha",
           {{"metric", "f1_at_k"},
            {"n", 3},
            {"excluded_degenerate", 0},
            {"perfect_proportion", 0.5},
            {"replicates", 1000},
            {"seed", 7},
            {"mean_metric", 0.8125},
            {"ci_low", 0.5},
            {"ci_high", 1.0}}},
          {"beta",
           {{"metric", "precision"},
            {"n", 2},
            {"excluded_degenerate", 2},
            {"perfect_proportion", 0.0},
            {"replicates", 1000},
            {"seed", 7},
            {"mean_metric", nullptr},
            {"ci_low", nullptr},
            {"ci_high", nullptr}}}}}};
    CHECK(report_markdown(report) ==
          "| group | metric | n | mean | perfect | 95% CI |\n"
          "|---|---|---|---|---|---|\n"
          "| alpha | f1_at_k | 3 | 0.8125 | 0.5000 | [0.5000, 1.0000] |\n"
          "| beta | precision | 2 | n/a | 0.0000 | [n/a, n/a] |\n");
}

TEST_CASE("report_csv leaves null cells empty") {
    nlohmann::json report{
        {"groups",
         {{"alpha",
           {{"metric", "f1_at_k"},
            {"n", 3},
            {"excluded_degenerate", 0},
            {"perfect_proportion", 0.5},
            {"mean_metric", 0.8125},
            {"ci_low", 0.5},
            {"ci_high", 1.0}}},
          {"beta",
           {{"metric", "precision"},
            {"n", 2},
            {"excluded_degenerate", 2},
            {"perfect_proportion", 0.0},
            {"mean_metric", nullptr},
            {"ci_low", nullptr},
            {"ci_high", nullptr}}}}}};
    CHECK(report_csv(report) ==
          "group,metric,n,excluded_degenerate,mean_metric,perfect_proportion,ci_low,ci_high\n"
          "alpha,f1_at_k,3,0,0.8125,0.5,0.5,1\n"
          "beta,precision,2,2,,0,,\n");
}
