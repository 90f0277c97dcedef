#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pic/claims.hpp"
#include "pic/gateway.hpp"
#include "pic/prompts.hpp"
#include "pic/verification.hpp"

namespace pic {

struct PipelineConfig {
    std::string draft_profile;
    std::string verify_profile;
    std::string final_profile;
    int k_samples = 5;
    int vote_threshold = 3; // verified iff TRUE votes >= threshold
    double verify_temperature = 0.7;
    std::optional<std::string> style_suffix; // e.g. "humorous"
    std::string question_template = std::string(prompts::kQuestionTemplate);
    VerifyOptions verify_options;
    uint64_t seed = 0;

    void validate() const; // 1 <= vote_threshold <= k_samples, etc.
};

struct VoteRecord {
    std::string answer;
    bool matched = false;
    bool call_failed = false; // gateway error: forced FALSE vote
};

struct QuestionRecord {
    std::string entity;
    std::string question;
    std::string candidate_claim;
    std::vector<VoteRecord> votes;
    size_t true_votes = 0;
    bool verified = false;
};

struct PipelineTrace {
    std::string id;
    std::string instruction;
    std::string draft_raw;
    std::vector<std::string> draft_entities;
    std::vector<QuestionRecord> questions;
    ClaimSet verified_claims;
    std::optional<std::string> final_response;
    bool excluded = false; // empty verified set: sample is excluded
    std::vector<std::string> warnings;
};

// Templated birthplace task, or generic when absent.
struct BirthplaceSpec {
    std::string occupation;
    std::string location;
};

struct PipelineInput {
    std::string id;
    std::string instruction;
    std::optional<BirthplaceSpec> birthplace;
};

// "N. entity" / "N) entity" lines; everything else is ignored.
std::vector<std::string> parse_numbered_list(const std::string& text);

// Step 1: instruction + verbatim numbered-list directive, parsed.
std::vector<std::string> draft_and_parse(Gateway& gateway, const PipelineConfig& config,
                                         const std::string& instruction,
                                         std::string* raw_completion = nullptr);

struct QuestionSpec {
    std::string entity;
    std::string question;
    std::string candidate_claim;
};

// Step 2: birthplace tasks use the fixed question/claim templates; generic
// tasks delegate question drafting to the verify profile.
std::vector<QuestionSpec> make_questions(Gateway& gateway, const PipelineConfig& config,
                                         const PipelineInput& input,
                                         const std::vector<std::string>& entities,
                                         std::vector<std::string>* warnings = nullptr);

// Step 3: k self-consistency samples at verify_temperature (seed = base + i),
// each answer judged against the candidate claim as a one-claim context.
QuestionRecord self_consistent_verify(Gateway& gateway, const PipelineConfig& config,
                                      const QuestionSpec& spec, uint64_t seed_base);

// Step 4 prompt: verbatim template plus optional trailing style sentence.
std::string final_generation_prompt(const std::string& instruction, const ClaimSet& verified,
                                    const std::optional<std::string>& style_suffix);

PipelineTrace run_pipeline(Gateway& gateway, const PipelineConfig& config,
                           const PipelineInput& input);

struct EvidencePrecision {
    std::optional<double> precision; // correct / total, empty when degenerate
    size_t correct = 0;
    size_t total = 0;
    bool degenerate = false; // zero extracted claims
    std::vector<SupportVerdict> verdicts;
    std::vector<std::string> warnings;
};

// Extract claims from a response, retrieve top-k snippets per claim text,
// judge each claim against its snippets.
EvidencePrecision evidence_factual_precision(Gateway& gateway, const std::string& extractor,
                                             const std::string& judge,
                                             const std::string& evidence_provider,
                                             const std::string& response, int top_k = 10);

// Partial-mode PIC prompt whose instruction is the question plus the verbatim
// RAG suffix.
std::string build_rag_prompt(const std::string& question, const ClaimSet& claims);

// RAG QA input row: {"question","answer_groups":[[aliases],...],"claims":[...]}.
struct RagSample {
    std::string id;
    std::string question;
    std::vector<std::vector<std::string>> answer_groups;
    ClaimSet claims;
};
RagSample rag_from_json(const nlohmann::json& j, size_t index_for_id);

// Occupation x location cross product (locations deduplicated, order kept).
std::vector<BirthplaceSpec> birthplace_task_list();
std::string birthplace_instruction(const BirthplaceSpec& spec);
const std::vector<std::string>& birthplace_occupations();
const std::vector<std::string>& birthplace_locations();

nlohmann::json trace_to_json(const PipelineTrace& t);

} // namespace pic
