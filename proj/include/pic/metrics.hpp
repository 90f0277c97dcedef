#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pic/claims.hpp"
#include "pic/extraction.hpp"
#include "pic/gateway.hpp"
#include "pic/verification.hpp"

namespace pic {

struct PicScore {
    size_t S = 0;       // response claims supported by the input set
    size_t N = 0;       // response claims not supported
    size_t covered = 0; // input claims supported by the response
    size_t k = 0;       // |C|, the input claim count
    std::optional<double> precision; // empty iff S + N == 0
    double recall_at_k = 0.0;
    double f1_at_k = 0.0;
    bool degenerate = false; // S + N == 0: no verifiable response claims
};

// Pure arithmetic core. k must be >= 1 (PreconditionError otherwise).
//   precision = S / (S + N), undefined when S + N == 0
//   recall@K  = min(covered / k, 1)
//   F1@K      = 0 when S == 0, else 2PR / (P + R) (0 when P + R == 0)
PicScore compute_pic_score(size_t S, size_t N, size_t covered, size_t k);

struct EvalProfiles {
    std::string extractor;
    std::string verifier;
};

struct EvalOptions {
    ExtractOptions extract;
    VerifyOptions verify;
};

struct EvaluationResult {
    PicScore score;
    ClaimSet extracted;            // C', the response's claims
    BatchVerdict precision_checks; // C' judged against C
    BatchVerdict recall_checks;    // C judged against C'
    std::vector<std::string> warnings;
};

// Full scoring path: extract C' from the response, run both verification
// directions, assemble the PicScore with K = |C|.
EvaluationResult evaluate_response(Gateway& gateway, const EvalProfiles& profiles,
                                   const PicTask& task, const std::string& response,
                                   const EvalOptions& options = {});

struct AggregateReport {
    size_t n = 0;
    double mean = 0.0;
    double perfect_proportion = 0.0; // share with metric >= threshold - 1e-9
    double ci_low = 0.0;             // percentile bootstrap, 95%
    double ci_high = 0.0;
    size_t replicates = 0;
    uint64_t seed = 0;
};

// Seeded percentile bootstrap over per-sample metric values. `scores` must be
// non-empty; replicates >= 1.
AggregateReport aggregate(const std::vector<double>& scores, double perfect_threshold = 1.0,
                          size_t replicates = 1000, uint64_t seed = 0);

// Score JSONL row: {"task_id","mode","S","N","covered","k","precision",
// "recall_at_k","f1_at_k","degenerate"}; precision is null when degenerate.
nlohmann::json score_to_json(const std::string& task_id, TaskMode mode, const PicScore& s);
PicScore score_from_json(const nlohmann::json& j);

} // namespace pic
