#pragma once

#include <string>
#include <vector>

#include "pic/claims.hpp"
#include "pic/gateway.hpp"
#include "pic/prompts.hpp"

namespace pic {

enum class SupportLabel { supported, unsupported };

std::string to_string(SupportLabel l);

struct SupportVerdict {
    std::string claim_id;
    SupportLabel label = SupportLabel::unsupported;
    std::vector<std::string> evidence_ids; // ids of supporting context claims
    std::string raw_judgment;
    bool parse_failed = false; // unparseable after one retry
    bool call_failed = false;  // gateway error; counted unsupported
};

struct VerifyOptions {
    std::string prompt_template = std::string(prompts::kVerificationTemplate);
    size_t max_parallel = 8;
};

// One LLM judgment of support(claim, against). `against` must be non-empty.
// An unparseable judgment is retried once (bypassing the cache); a second
// failure yields unsupported with parse_failed set.
SupportVerdict verify_claim(Gateway& gateway, const std::string& verifier_profile,
                            const VerifiableClaim& claim, const ClaimSet& against,
                            const VerifyOptions& options = {});

struct BatchVerdict {
    size_t supported = 0;
    size_t unsupported = 0;
    std::vector<SupportVerdict> verdicts; // input order
    std::vector<std::string> warnings;
};

// Parallel fan-out with order-preserving merge; supported + unsupported always
// equals |claims|. A claim whose verification call fails outright counts as
// unsupported and is flagged.
BatchVerdict verify_batch(Gateway& gateway, const std::string& verifier_profile,
                          const ClaimSet& claims, const ClaimSet& against,
                          const VerifyOptions& options = {});

// First line must begin with "supported"/"unsupported" (case-insensitive);
// any integers on that line are 1-based context indices.
struct ParsedJudgment {
    SupportLabel label;
    std::vector<size_t> evidence_indices;
};
std::optional<ParsedJudgment> parse_judgment(const std::string& completion);

} // namespace pic
