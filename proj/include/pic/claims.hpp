#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pic {

enum class ClaimSource { gold_response, context, extracted, verified_pipeline };
enum class Provenance { input_context, gold_derived, response_extracted };
enum class TaskMode { full, partial };

std::string to_string(ClaimSource s);
std::string to_string(Provenance p);
std::string to_string(TaskMode m);
ClaimSource claim_source_from_string(const std::string& s);
Provenance provenance_from_string(const std::string& s);
TaskMode task_mode_from_string(const std::string& s);

// Character span into the source text a claim was derived from.
struct TextSpan {
    size_t begin = 0;
    size_t end = 0;
};

struct VerifiableClaim {
    std::string id;
    std::string text;
    ClaimSource source = ClaimSource::context;
    std::optional<TextSpan> span;
};

// Canonical comparison form: trimmed, whitespace collapsed, ASCII casefolded,
// with exactly one trailing '.', '!' or '?' removed if present.
std::string normalized_text(const std::string& text);

struct ClaimSet {
    std::vector<VerifiableClaim> claims;
    Provenance provenance = Provenance::input_context;

    size_t size() const { return claims.size(); }
    bool empty() const { return claims.empty(); }
};

struct PicTask {
    std::string id;
    TaskMode mode = TaskMode::full;
    std::string instruction;
    ClaimSet claims;
    std::optional<std::string> gold_response;
    std::optional<std::pair<int, int>> word_limit;
    std::map<std::string, std::string> metadata;
};

enum class ViolationKind { empty_set, duplicate, contradiction };

std::string to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::vector<std::string> claim_ids;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<std::string> warnings;
    bool ok() const { return violations.empty(); }
};

// Judge for the opt-in contradiction check. Returns true/false for a parsed
// verdict, nullopt when the judge's answer was unparseable.
using ContradictionJudge =
    std::function<std::optional<bool>(const std::string& claim_a, const std::string& claim_b)>;

struct ValidateOptions {
    bool check_contradictions = false;
    ContradictionJudge judge; // required iff check_contradictions
};

// Reports every violated criterion; never mutates. Requesting contradiction
// checks without a judge is a ConfigError.
ValidationReport validate_claim_set(const ClaimSet& set, const ValidateOptions& options = {});

// Drops claims whose normalized_text was already seen; first occurrence wins,
// input order is otherwise preserved. Idempotent.
ClaimSet dedup_claims(const std::vector<VerifiableClaim>& claims,
                      Provenance provenance = Provenance::response_extracted);

// "1. <text>\n2. <text>..." rendering used by every prompt that lists claims.
std::string render_claim_list(const ClaimSet& claims);

// Instantiates the mode's prompt template. The task must have a non-empty
// claim set (PreconditionError otherwise).
std::string render_prompt(const PicTask& task);

// Claim texts joined by `separator`; the trivial PIC baseline response.
std::string concat_claims_baseline(const ClaimSet& claims, const std::string& separator = " ");

// Task JSONL: {"id","mode","instruction","claims":[{"id","text"},...],
// "gold_response","word_limit","metadata"}. UTF-8, no BOM.
PicTask task_from_json(const nlohmann::json& j);
nlohmann::json task_to_json(const PicTask& task);
std::vector<PicTask> load_tasks(const std::filesystem::path& path);
void save_tasks(const std::filesystem::path& path, const std::vector<PicTask>& tasks);

nlohmann::json claim_to_json(const VerifiableClaim& c);
VerifiableClaim claim_from_json(const nlohmann::json& j, size_t index_for_id);

} // namespace pic
