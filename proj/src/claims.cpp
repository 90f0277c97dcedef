#include "pic/claims.hpp"

#include <unordered_map>
#include <unordered_set>

#include "pic/errors.hpp"
#include "pic/prompts.hpp"
#include "pic/util.hpp"

namespace pic {

std::string to_string(ClaimSource s) {
    switch (s) {
        case ClaimSource::gold_response: return "gold_response";
        case ClaimSource::context: return "context";
        case ClaimSource::extracted: return "extracted";
        case ClaimSource::verified_pipeline: return "verified_pipeline";
    }
    throw std::logic_error("unknown ClaimSource");
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::input_context: return "input_context";
        case Provenance::gold_derived: return "gold_derived";
        case Provenance::response_extracted: return "response_extracted";
    }
    throw std::logic_error("unknown Provenance");
}

std::string to_string(TaskMode m) {
    switch (m) {
        case TaskMode::full: return "full";
        case TaskMode::partial: return "partial";
    }
    throw std::logic_error("unknown TaskMode");
}

std::string to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::empty_set: return "empty_set";
        case ViolationKind::duplicate: return "duplicate";
        case ViolationKind::contradiction: return "contradiction";
    }
    throw std::logic_error("unknown ViolationKind");
}

ClaimSource claim_source_from_string(const std::string& s) {
    if (s == "gold_response") return ClaimSource::gold_response;
    if (s == "context") return ClaimSource::context;
    if (s == "extracted") return ClaimSource::extracted;
    if (s == "verified_pipeline") return ClaimSource::verified_pipeline;
    throw InputError("unknown claim source: " + s);
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "input_context") return Provenance::input_context;
    if (s == "gold_derived") return Provenance::gold_derived;
    if (s == "response_extracted") return Provenance::response_extracted;
    throw InputError("unknown provenance: " + s);
}

TaskMode task_mode_from_string(const std::string& s) {
    if (s == "full") return TaskMode::full;
    if (s == "partial") return TaskMode::partial;
    throw InputError("unknown task mode: " + s);
}

std::string normalized_text(const std::string& text) {
    std::string out = to_lower_ascii(collapse_whitespace(trim(text)));
    if (!out.empty()) {
        char last = out.back();
        if (last == '.' || last == '!' || last == '?') out.pop_back();
    }
    return out;
}

ValidationReport validate_claim_set(const ClaimSet& set, const ValidateOptions& options) {
    if (options.check_contradictions && !options.judge)
        throw ConfigError("contradiction checking requested without a verifier");

    ValidationReport report;
    if (set.empty()) {
        report.violations.push_back({ViolationKind::empty_set, {}, "claim set is empty"});
        return report;
    }

    std::unordered_map<std::string, size_t> seen;
    for (size_t i = 0; i < set.claims.size(); ++i) {
        const auto& c = set.claims[i];
        std::string norm = normalized_text(c.text);
        auto it = seen.find(norm);
        if (it != seen.end()) {
            const auto& first = set.claims[it->second];
            report.violations.push_back({ViolationKind::duplicate,
                                         {first.id, c.id},
                                         "duplicate normalized text: \"" + norm + "\""});
        } else {
            seen.emplace(std::move(norm), i);
        }
    }

    if (options.check_contradictions) {
        for (size_t i = 0; i < set.claims.size(); ++i) {
            for (size_t j = i + 1; j < set.claims.size(); ++j) {
                auto verdict = options.judge(set.claims[i].text, set.claims[j].text);
                if (!verdict.has_value()) {
                    report.warnings.push_back("contradiction judgment unparseable for (" +
                                              set.claims[i].id + ", " + set.claims[j].id +
                                              "); treated as no contradiction");
                    continue;
                }
                if (*verdict) {
                    report.violations.push_back({ViolationKind::contradiction,
                                                 {set.claims[i].id, set.claims[j].id},
                                                 "claims judged mutually contradictory"});
                }
            }
        }
    }
    return report;
}

ClaimSet dedup_claims(const std::vector<VerifiableClaim>& claims, Provenance provenance) {
    ClaimSet out;
    out.provenance = provenance;
    std::unordered_set<std::string> seen;
    for (const auto& c : claims) {
        if (seen.insert(normalized_text(c.text)).second) out.claims.push_back(c);
    }
    return out;
}

std::string render_claim_list(const ClaimSet& claims) {
    std::string out;
    for (size_t i = 0; i < claims.claims.size(); ++i) {
        if (i) out += '\n';
        out += std::to_string(i + 1);
        out += ". ";
        out += claims.claims[i].text;
    }
    return out;
}

std::string render_prompt(const PicTask& task) {
    if (task.claims.empty())
        throw PreconditionError("render_prompt: task " + task.id + " has an empty claim set");
    std::string_view tmpl =
        task.mode == TaskMode::full ? prompts::kFullTemplate : prompts::kPartialTemplate;
    std::string out(tmpl);
    out = replace_all(std::move(out), "{instruction}", task.instruction);
    out = replace_all(std::move(out), "{claims}", render_claim_list(task.claims));
    return out;
}

std::string concat_claims_baseline(const ClaimSet& claims, const std::string& separator) {
    if (claims.empty())
        throw PreconditionError("concat_claims_baseline: claim set is empty");
    std::string out;
    for (size_t i = 0; i < claims.claims.size(); ++i) {
        if (i) out += separator;
        out += claims.claims[i].text;
    }
    return out;
}

VerifiableClaim claim_from_json(const nlohmann::json& j, size_t index_for_id) {
    VerifiableClaim c;
    if (j.is_string()) {
        c.text = j.get<std::string>();
    } else if (j.is_object()) {
        if (!j.contains("text") || !j.at("text").is_string())
            throw InputError("claim object missing string \"text\"");
        c.text = j.at("text").get<std::string>();
        if (j.contains("id") && !j.at("id").is_null()) {
            if (j.at("id").is_string())
                c.id = j.at("id").get<std::string>();
            else
                c.id = j.at("id").dump();
        }
        if (j.contains("source") && j.at("source").is_string())
            c.source = claim_source_from_string(j.at("source").get<std::string>());
    } else {
        throw InputError("claim must be a string or an object");
    }
    if (c.id.empty()) c.id = "c" + std::to_string(index_for_id + 1);
    return c;
}

nlohmann::json claim_to_json(const VerifiableClaim& c) {
    return nlohmann::json{{"id", c.id}, {"text", c.text}};
}

PicTask task_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("task line must be a JSON object");
    PicTask t;
    if (!j.contains("id")) throw InputError("task missing \"id\"");
    t.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    if (!j.contains("mode") || !j.at("mode").is_string())
        throw InputError("task " + t.id + " missing string \"mode\"");
    t.mode = task_mode_from_string(j.at("mode").get<std::string>());
    if (!j.contains("instruction") || !j.at("instruction").is_string())
        throw InputError("task " + t.id + " missing string \"instruction\"");
    t.instruction = j.at("instruction").get<std::string>();
    if (!j.contains("claims") || !j.at("claims").is_array())
        throw InputError("task " + t.id + " missing array \"claims\"");
    t.claims.provenance = Provenance::input_context;
    size_t idx = 0;
    for (const auto& cj : j.at("claims")) t.claims.claims.push_back(claim_from_json(cj, idx++));
    if (j.contains("gold_response") && j.at("gold_response").is_string())
        t.gold_response = j.at("gold_response").get<std::string>();
    if (j.contains("word_limit") && j.at("word_limit").is_array() &&
        j.at("word_limit").size() == 2) {
        t.word_limit = {j.at("word_limit")[0].get<int>(), j.at("word_limit")[1].get<int>()};
    }
    if (j.contains("metadata") && j.at("metadata").is_object()) {
        for (auto it = j.at("metadata").begin(); it != j.at("metadata").end(); ++it) {
            t.metadata[it.key()] =
                it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
        }
    }
    return t;
}

nlohmann::json task_to_json(const PicTask& task) {
    nlohmann::json j;
    j["id"] = task.id;
    j["mode"] = to_string(task.mode);
    j["instruction"] = task.instruction;
    auto claims = nlohmann::json::array();
    for (const auto& c : task.claims.claims) claims.push_back(claim_to_json(c));
    j["claims"] = std::move(claims);
    j["gold_response"] = task.gold_response ? nlohmann::json(*task.gold_response) : nullptr;
    j["word_limit"] = task.word_limit
                          ? nlohmann::json::array({task.word_limit->first, task.word_limit->second})
                          : nlohmann::json(nullptr);
    j["metadata"] = task.metadata;
    return j;
}

std::vector<PicTask> load_tasks(const std::filesystem::path& path) {
    std::vector<PicTask> tasks;
    auto rows = read_jsonl(path);
    size_t lineno = 0;
    for (const auto& row : rows) {
        ++lineno;
        try {
            tasks.push_back(task_from_json(row));
        } catch (const InputError& e) {
            throw InputError(path.string() + ": task record " + std::to_string(lineno) + ": " +
                             e.what());
        }
    }
    return tasks;
}

void save_tasks(const std::filesystem::path& path, const std::vector<PicTask>& tasks) {
    std::vector<nlohmann::json> rows;
    rows.reserve(tasks.size());
    for (const auto& t : tasks) rows.push_back(task_to_json(t));
    write_jsonl(path, rows);
}

} // namespace pic
