#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pic/claims.hpp"
#include "pic/metrics.hpp"

namespace pic {

struct ScoreRow {
    std::string task_id;
    TaskMode mode = TaskMode::full;
    PicScore score;
};

// Aggregates score rows into one group entry per mode plus "overall". The
// reported metric is f1_at_k for full tasks and precision for partial ones;
// degenerate partial rows carry no precision, so they are excluded from the
// mean and CI but still count as imperfect samples.
nlohmann::json eval_report_json(const std::vector<ScoreRow>& rows, size_t replicates,
                                uint64_t seed);

// One already-defined metric column (EM, QAMPARI precision, ...) aggregated
// the same way: mean, perfect proportion, bootstrap CI.
nlohmann::json metric_summary_json(const std::string& metric, const std::vector<double>& values,
                                   size_t replicates, uint64_t seed);

// Renderings of eval_report_json / a {"groups": {...}} report object.
std::string report_markdown(const nlohmann::json& report);
std::string report_csv(const nlohmann::json& report);

} // namespace pic
