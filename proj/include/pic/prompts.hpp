#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace pic::prompts {

// Treat every template here as frozen once versioned: downstream caches key
// on the rendered prompt bytes, so editing a template means bumping the id.

inline constexpr std::string_view kFullTemplateId = "pic-full/v1";
inline constexpr std::string_view kFullTemplate =
    "[INST] Complete the instruction and include **exactly all** of the following claims--no "
    "more, no fewer. Your response must be entirely grounded on the given context while also "
    "answering the question.\n"
    "\n"
    "Instruction:\n"
    "{instruction}\n"
    "Claims:\n"
    "{claims}\n"
    "Response:\n"
    "[/INST]";

inline constexpr std::string_view kPartialTemplateId = "pic-partial/v1";
inline constexpr std::string_view kPartialTemplate =
    "[INST] Complete the instruction using **any subset** of the following claims, if they help "
    "your answer. Do not introduce any new claims beyond what's given. Make sure that your "
    "response is grounded on the given context, while also answering the question.\n"
    "\n"
    "Instruction:\n"
    "{instruction}\n"
    "Claims:\n"
    "{claims}\n"
    "Response:\n"
    "[/INST]";

inline constexpr std::string_view kExtractionTemplateId = "extraction/v1";
inline constexpr std::string_view kExtractionTemplate =
    "You will be given a focus sentence from a longer text, together with its previous and next "
    "sentences for context. Extract every verifiable claim that the focus sentence makes. A "
    "verifiable claim is a single, self-contained factual statement that can be checked against "
    "a source; resolve pronouns and vague references using the context so each claim stands on "
    "its own. Do not include opinions, questions, or information that appears only in the "
    "context sentences. Write one claim per line, each prefixed with \"- \". If the focus "
    "sentence makes no verifiable claim, respond with \"None\".\n"
    "\n"
    "Previous sentence: {prev}\n"
    "Focus sentence: {focus}\n"
    "Next sentence: {next}\n"
    "Claims:";

inline constexpr std::string_view kVerificationTemplateId = "verification/v1";
inline constexpr std::string_view kVerificationTemplate =
    "You will be given a candidate claim and a numbered list of context claims. Decide whether "
    "the candidate claim is supported by the context claims. The candidate is supported if it "
    "is semantically equivalent to, or directly entailed by, one or more of the context claims; "
    "it is unsupported if it adds, changes, or contradicts information. Respond on the first "
    "line with exactly \"supported\" or \"unsupported\", followed by the numbers of the "
    "supporting context claims, if any.\n"
    "\n"
    "Context claims:\n"
    "{context}\n"
    "\n"
    "Candidate claim: {claim}\n"
    "Answer:";

inline constexpr std::string_view kContradictionTemplateId = "contradiction/v1";
inline constexpr std::string_view kContradictionTemplate =
    "Decide whether the two claims below contradict each other, i.e. they cannot both be true "
    "at the same time. Respond on the first line with exactly \"yes\" or \"no\".\n"
    "\n"
    "Claim A: {a}\n"
    "Claim B: {b}\n"
    "Answer:";

inline constexpr std::string_view kQuestionTemplateId = "question/v1";
inline constexpr std::string_view kQuestionTemplate =
    "You will be given an instruction and one entity from a draft answer to that instruction. "
    "Write a single verification question whose answer would confirm that the entity belongs in "
    "the answer, and restate the checked fact as one self-contained claim. Respond with exactly "
    "two lines:\n"
    "Question: <the verification question>\n"
    "Claim: <the claim being checked>\n"
    "\n"
    "Instruction: {instruction}\n"
    "Entity: {entity}";

// Appended verbatim to the instruction when drafting the step-1 entity list.
inline constexpr std::string_view kDraftDirective =
    "Return your output in numbered list form (enumerated as `1. <entity 1>\\n2. <entity "
    "2>\\n3...'), and with no other explanation or additional information.";

inline constexpr std::string_view kFinalTemplateId = "pipeline-final/v1";
inline constexpr std::string_view kFinalTemplate =
    "Your task is to complete the instruction. Ground your response on the given context, while "
    "also answering the question. Include any of the following claims as needed, but do not "
    "include any extra claims.\n"
    "\n"
    "Instruction: {instruction}\n"
    "\n"
    "Claims: {claims}";

inline constexpr std::string_view kStyleSuffixTemplate =
    "Please answer in full sentences in a(n) {style} way.";

inline constexpr std::string_view kRagSuffix =
    "Note that there are multiple possible answers; please return all of them. Answer the "
    "question by returning verbatim **exactly all** of the claims that contain the desired "
    "answer.";

inline constexpr std::string_view kBirthplaceQuestionTemplate =
    "Where was the {occupation} {entity} born?";
inline constexpr std::string_view kBirthplaceClaimTemplate =
    "{entity} is a {occupation} born in {location}.";
inline constexpr std::string_view kBirthplaceInstructionTemplate =
    "Name some {occupation}s born in {location}.";

// File-based overrides, wired from CLI flags. Empty optional = shipped asset.
struct PromptOverrides {
    std::optional<std::string> extraction_template;
    std::optional<std::string> verification_template;
    std::optional<std::string> contradiction_template;
    std::optional<std::string> question_template;
};

} // namespace pic::prompts
