#include "pic/report.hpp"

#include <cmath>
#include <sstream>

#include "pic/prefdata.hpp"

namespace pic {

namespace {

// Group entry over rows whose metric may be undefined (degenerate partial
// precision). Mean/CI cover the defined values; the perfect proportion uses
// the full denominator so degenerate rows count as imperfect.
nlohmann::json group_entry(const std::string& metric,
                           const std::vector<std::optional<double>>& values, size_t replicates,
                           uint64_t seed) {
    std::vector<double> defined;
    size_t perfect = 0;
    for (const auto& v : values) {
        if (!v) continue;
        defined.push_back(*v);
        if (*v >= 1.0 - kScoreTolerance) ++perfect;
    }
    nlohmann::json entry{{"metric", metric},
                         {"n", values.size()},
                         {"excluded_degenerate", values.size() - defined.size()},
                         {"perfect_proportion",
                          values.empty() ? 0.0
                                         : static_cast<double>(perfect) /
                                               static_cast<double>(values.size())},
                         {"replicates", replicates},
                         {"seed", seed}};
    if (defined.empty()) {
        entry["mean_metric"] = nullptr;
        entry["ci_low"] = nullptr;
        entry["ci_high"] = nullptr;
        return entry;
    }
    auto agg = aggregate(defined, 1.0, replicates, seed);
    entry["mean_metric"] = agg.mean;
    entry["ci_low"] = agg.ci_low;
    entry["ci_high"] = agg.ci_high;
    return entry;
}

std::optional<double> row_metric(const ScoreRow& row) {
    if (row.mode == TaskMode::full) return row.score.f1_at_k;
    return row.score.precision; // empty when degenerate
}

std::string fmt(const nlohmann::json& v) {
    if (v.is_null()) return "n/a";
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << v.get<double>();
    return os.str();
}

} // namespace

nlohmann::json eval_report_json(const std::vector<ScoreRow>& rows, size_t replicates,
                                uint64_t seed) {
    std::vector<std::optional<double>> overall, full, partial;
    for (const auto& row : rows) {
        auto v = row_metric(row);
        overall.push_back(v);
        (row.mode == TaskMode::full ? full : partial).push_back(v);
    }
    nlohmann::json groups = nlohmann::json::object();
    if (!full.empty()) groups["full"] = group_entry("f1_at_k", full, replicates, seed);
    if (!partial.empty())
        groups["partial"] = group_entry("precision", partial, replicates, seed);
    std::string overall_metric = partial.empty() ? "f1_at_k"
                                 : full.empty()  ? "precision"
                                                 : "mode_primary";
    groups["overall"] = group_entry(overall_metric, overall, replicates, seed);
    return nlohmann::json{{"groups", groups}};
}

nlohmann::json metric_summary_json(const std::string& metric, const std::vector<double>& values,
                                   size_t replicates, uint64_t seed) {
    std::vector<std::optional<double>> wrapped(values.begin(), values.end());
    return group_entry(metric, wrapped, replicates, seed);
}

std::string report_markdown(const nlohmann::json& report) {
    std::ostringstream os;
    os << "| group | metric | n | mean | perfect | 95% CI |\n";
    os << "|---|---|---|---|---|---|\n";
    for (const auto& [name, g] : report.at("groups").items()) {
        os << "| " << name << " | " << g.at("metric").get<std::string>() << " "
           << "| " << g.at("n").get<size_t>() << " "
           << "| " << fmt(g.at("mean_metric")) << " "
           << "| " << fmt(g.at("perfect_proportion")) << " "
           << "| [" << fmt(g.at("ci_low")) << ", " << fmt(g.at("ci_high")) << "] |\n";
    }
    return os.str();
}

std::string report_csv(const nlohmann::json& report) {
    std::ostringstream os;
    os << "group,metric,n,excluded_degenerate,mean_metric,perfect_proportion,ci_low,ci_high\n";
    auto cell = [](const nlohmann::json& v) -> std::string {
        if (v.is_null()) return "";
        std::ostringstream c;
        c << v.get<double>();
        return c.str();
    };
    for (const auto& [name, g] : report.at("groups").items()) {
        os << name << "," << g.at("metric").get<std::string>() << ","
           << g.at("n").get<size_t>() << "," << g.at("excluded_degenerate").get<size_t>() << ","
           << cell(g.at("mean_metric")) << "," << cell(g.at("perfect_proportion")) << ","
           << cell(g.at("ci_low")) << "," << cell(g.at("ci_high")) << "\n";
    }
    return os.str();
}

} // namespace pic
