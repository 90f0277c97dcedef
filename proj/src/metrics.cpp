#include "pic/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pic/errors.hpp"
#include "pic/util.hpp"

namespace pic {

PicScore compute_pic_score(size_t S, size_t N, size_t covered, size_t k) {
    if (k == 0) throw PreconditionError("compute_pic_score: k must be >= 1");
    PicScore s;
    s.S = S;
    s.N = N;
    s.covered = covered;
    s.k = k;
    if (S + N == 0) {
        s.degenerate = true;
    } else {
        s.precision = static_cast<double>(S) / static_cast<double>(S + N);
    }
    s.recall_at_k = std::min(static_cast<double>(covered) / static_cast<double>(k), 1.0);
    if (S == 0) {
        s.f1_at_k = 0.0;
    } else {
        double p = *s.precision;
        double r = s.recall_at_k;
        s.f1_at_k = (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
    return s;
}

EvaluationResult evaluate_response(Gateway& gateway, const EvalProfiles& profiles,
                                   const PicTask& task, const std::string& response,
                                   const EvalOptions& options) {
    if (task.claims.empty())
        throw PreconditionError("evaluate_response: task " + task.id + " has no claims (k = 0)");

    EvaluationResult result;
    auto rethrow_with_task = [&](const char* stage) {
        try {
            throw;
        } catch (const RetryableError& e) {
            throw RetryableError("task " + task.id + " " + stage + ": " + e.what(), e.status());
        } catch (const PermanentError& e) {
            throw PermanentError("task " + task.id + " " + stage + ": " + e.what(), e.status());
        } catch (const ProtocolError& e) {
            throw ProtocolError("task " + task.id + " " + stage + ": " + e.what());
        }
    };

    try {
        auto extraction = extract_claims(gateway, profiles.extractor, response, options.extract);
        result.extracted = std::move(extraction.claims);
        for (auto& w : extraction.warnings)
            result.warnings.push_back("task " + task.id + ": " + std::move(w));
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        rethrow_with_task("extraction");
    }

    size_t S = 0, N = 0, covered = 0;
    if (!result.extracted.empty()) {
        try {
            result.precision_checks =
                verify_batch(gateway, profiles.verifier, result.extracted, task.claims,
                             options.verify);
            result.recall_checks = verify_batch(gateway, profiles.verifier, task.claims,
                                                result.extracted, options.verify);
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            rethrow_with_task("verification");
        }
        S = result.precision_checks.supported;
        N = result.precision_checks.unsupported;
        covered = result.recall_checks.supported;
        for (auto& w : result.precision_checks.warnings)
            result.warnings.push_back("task " + task.id + ": " + w);
        for (auto& w : result.recall_checks.warnings)
            result.warnings.push_back("task " + task.id + ": " + w);
    }

    result.score = compute_pic_score(S, N, covered, task.claims.size());
    return result;
}

AggregateReport aggregate(const std::vector<double>& scores, double perfect_threshold,
                          size_t replicates, uint64_t seed) {
    if (scores.empty()) throw PreconditionError("aggregate: empty score vector");
    if (replicates < 1) throw PreconditionError("aggregate: replicates must be >= 1");

    AggregateReport report;
    report.n = scores.size();
    report.replicates = replicates;
    report.seed = seed;
    report.mean = mean_of(scores);

    size_t perfect = 0;
    for (double s : scores) {
        if (s >= perfect_threshold - 1e-9) ++perfect;
    }
    report.perfect_proportion = static_cast<double>(perfect) / static_cast<double>(scores.size());

    Rng rng(seed);
    std::vector<double> means(replicates);
    const size_t n = scores.size();
    for (size_t b = 0; b < replicates; ++b) {
        double sum = 0.0;
        for (size_t i = 0; i < n; ++i) sum += scores[rng.index(n)];
        means[b] = sum / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    auto lo_idx = static_cast<size_t>(std::floor(0.025 * static_cast<double>(replicates - 1)));
    auto hi_idx = static_cast<size_t>(std::ceil(0.975 * static_cast<double>(replicates - 1)));
    report.ci_low = means[lo_idx];
    report.ci_high = means[hi_idx];
    return report;
}

nlohmann::json score_to_json(const std::string& task_id, TaskMode mode, const PicScore& s) {
    nlohmann::json j;
    j["task_id"] = task_id;
    j["mode"] = to_string(mode);
    j["S"] = s.S;
    j["N"] = s.N;
    j["covered"] = s.covered;
    j["k"] = s.k;
    j["precision"] = s.precision ? nlohmann::json(*s.precision) : nlohmann::json(nullptr);
    j["recall_at_k"] = s.recall_at_k;
    j["f1_at_k"] = s.f1_at_k;
    j["degenerate"] = s.degenerate;
    return j;
}

PicScore score_from_json(const nlohmann::json& j) {
    PicScore s;
    s.S = j.at("S").get<size_t>();
    s.N = j.at("N").get<size_t>();
    s.covered = j.at("covered").get<size_t>();
    s.k = j.at("k").get<size_t>();
    if (j.contains("precision") && !j.at("precision").is_null())
        s.precision = j.at("precision").get<double>();
    s.recall_at_k = j.at("recall_at_k").get<double>();
    s.f1_at_k = j.at("f1_at_k").get<double>();
    s.degenerate = j.at("degenerate").get<bool>();
    return s;
}

} // namespace pic
