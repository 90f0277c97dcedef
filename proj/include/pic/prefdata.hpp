#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pic/claims.hpp"
#include "pic/gateway.hpp"
#include "pic/metrics.hpp"
#include "pic/util.hpp"

namespace pic {

enum class TaskFamily { general, biography, summarization, qa, other };

std::string to_string(TaskFamily f);
TaskFamily task_family_from_string(const std::string& s);

struct RawSample {
    std::string id;
    std::string instruction;
    std::optional<std::string> context; // partial mode extracts claims here
    std::optional<std::string> gold_response;
    TaskFamily family = TaskFamily::general;
    TaskMode mode = TaskMode::full;
};

struct SftSample {
    std::string id;
    std::string instruction;
    ClaimSet claims;
    std::string response; // >= 128 characters by construction
    TaskFamily family = TaskFamily::general;
    TaskMode mode = TaskMode::full;
    double pic_score_at_filter = 0.0;
};

enum class DropReason {
    none,
    missing_gold,
    missing_context,
    too_short,
    no_claims,
    low_score,
};

std::string to_string(DropReason r);

struct ConvertOutcome {
    std::optional<SftSample> sample; // set iff retained
    DropReason reason = DropReason::none;
    double score = 0.0; // PIC score at the filter gate, when it was computed
};

inline constexpr size_t kMinResponseChars = 128;
inline constexpr double kScoreThresholdDefault = 1.0;
inline constexpr double kScoreThresholdBiography = 0.9;
inline constexpr double kScoreTolerance = 1e-9;

double filter_threshold(TaskFamily family);

// SFT construction gate: length filter, claim extraction (gold response in
// full mode, context in partial), PIC-score filter (F1 full / precision
// partial) against the family threshold.
ConvertOutcome convert_and_filter(Gateway& gateway, const EvalProfiles& profiles,
                                  const RawSample& raw, const EvalOptions& options = {});

struct PerturbParams {
    double p_min = 0.1;
    double p_max = 0.5;
    double tau = 0.5; // full-mode default; 0.3 for partial
    int last_l = 20;
    uint64_t seed = 0;

    void validate() const;
};

inline constexpr double kTauDefaultFull = 0.5;
inline constexpr double kTauDefaultPartial = 0.3;

struct PerturbResult {
    ClaimSet perturbed;
    std::vector<std::string> dropped_claim_ids;
};

// Random claim removal, Algorithm-1 style: with k = |claims| >= 2 removes
// m ~ Uniform{m_min..m_max} claims where m_min = max(1, floor(p_min*k)) and
// m_max = min(k-1, floor(p_max*k)) clamped so 1 <= m <= k-1 always holds.
// k <= 1 returns the set unchanged. Survivor order is preserved.
PerturbResult perturb_claims(const ClaimSet& claims, const PerturbParams& params, Rng& rng);

// Mean logprob over the final min(last_l, len) tokens.
double mean_last_l(const std::vector<TokenLogprob>& tokens, int last_l);

// z = sigmoid(mean_orig - mean_perturbed); both sequences must be non-empty.
double normalized_drop(const std::vector<TokenLogprob>& orig,
                       const std::vector<TokenLogprob>& perturbed, int last_l);

enum class PrefBranch { original_preferred, perturbed_preferred };

std::string to_string(PrefBranch b);

struct PrefTuple {
    std::string id;
    std::string instruction;
    ClaimSet claims; // C_orig on the original branch, C_perturb otherwise
    std::string chosen;
    std::string rejected;
    double drop_score = 0.0; // z, in (0, 1)
    PrefBranch branch = PrefBranch::original_preferred;
    std::vector<std::string> dropped_claim_ids;
};

enum class PrefSkipReason { none, no_contrast };

std::string to_string(PrefSkipReason r);

struct PrefProfiles {
    std::string sft_profile; // theta_SFT: generates y_perturb
    std::string ref_profile; // theta_Ref: scores logprobs, instruction-only
};

struct PrefOutcome {
    std::optional<PrefTuple> tuple;
    PrefSkipReason skip = PrefSkipReason::none;
};

// Weak supervision step: perturb the claim set, regenerate under the
// perturbed claims, score both responses conditioned on the instruction
// alone, and branch on z > tau (strict).
PrefOutcome build_preference(Gateway& gateway, const PrefProfiles& profiles,
                             const SftSample& sample, const PerturbParams& params);

// JSONL codecs.
nlohmann::json sft_to_json(const SftSample& s);
SftSample sft_from_json(const nlohmann::json& j, size_t index_for_id);
nlohmann::json pref_to_json(const PrefTuple& t);
RawSample raw_from_json(const nlohmann::json& j, size_t index_for_id);

} // namespace pic
