#include "pic/pipeline.hpp"

#include <cctype>

#include "pic/errors.hpp"
#include "pic/extraction.hpp"
#include "pic/util.hpp"

namespace pic {

void PipelineConfig::validate() const {
    if (draft_profile.empty() || verify_profile.empty() || final_profile.empty())
        throw ConfigError("pipeline requires draft, verify and final profiles");
    if (k_samples < 1) throw ConfigError("k_samples must be >= 1");
    if (vote_threshold < 1 || vote_threshold > k_samples)
        throw ConfigError("vote_threshold must satisfy 1 <= vote_threshold <= k_samples");
    if (verify_temperature < 0.0) throw ConfigError("verify_temperature must be >= 0");
}

std::vector<std::string> parse_numbered_list(const std::string& text) {
    std::vector<std::string> items;
    for (const auto& raw : split_lines(text)) {
        std::string line = trim(raw);
        size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i == 0 || i >= line.size()) continue;
        if (line[i] != '.' && line[i] != ')') continue;
        std::string item = trim(line.substr(i + 1));
        if (!item.empty()) items.push_back(std::move(item));
    }
    return items;
}

std::vector<std::string> draft_and_parse(Gateway& gateway, const PipelineConfig& config,
                                         const std::string& instruction,
                                         std::string* raw_completion) {
    std::string prompt = instruction + " " + std::string(prompts::kDraftDirective);
    std::string completion = gateway.complete(config.draft_profile, prompt).text;
    if (raw_completion) *raw_completion = completion;
    return parse_numbered_list(completion);
}

namespace {

std::string fill_birthplace(std::string_view tmpl, const BirthplaceSpec& spec,
                            const std::string& entity) {
    std::string out(tmpl);
    out = replace_all(std::move(out), "{occupation}", spec.occupation);
    out = replace_all(std::move(out), "{location}", spec.location);
    out = replace_all(std::move(out), "{entity}", entity);
    return out;
}

} // namespace

std::vector<QuestionSpec> make_questions(Gateway& gateway, const PipelineConfig& config,
                                         const PipelineInput& input,
                                         const std::vector<std::string>& entities,
                                         std::vector<std::string>* warnings) {
    std::vector<QuestionSpec> specs;
    for (const auto& entity : entities) {
        if (input.birthplace) {
            QuestionSpec q;
            q.entity = entity;
            q.question = fill_birthplace(prompts::kBirthplaceQuestionTemplate, *input.birthplace,
                                         entity);
            q.candidate_claim = fill_birthplace(prompts::kBirthplaceClaimTemplate,
                                                *input.birthplace, entity);
            specs.push_back(std::move(q));
            continue;
        }
        // Generic task: the verify profile drafts the question and the claim.
        std::string prompt = config.question_template;
        prompt = replace_all(std::move(prompt), "{instruction}", input.instruction);
        prompt = replace_all(std::move(prompt), "{entity}", entity);
        std::string completion = gateway.complete(config.verify_profile, prompt).text;
        std::string question, claim;
        for (const auto& raw : split_lines(completion)) {
            std::string line = trim(raw);
            if (starts_with_icase(line, "question:"))
                question = trim(line.substr(9));
            else if (starts_with_icase(line, "claim:"))
                claim = trim(line.substr(6));
        }
        if (question.empty() || claim.empty()) {
            if (warnings)
                warnings->push_back("entity \"" + entity +
                                    "\": question drafting unparseable, entity skipped");
            continue;
        }
        specs.push_back({entity, std::move(question), std::move(claim)});
    }
    return specs;
}

QuestionRecord self_consistent_verify(Gateway& gateway, const PipelineConfig& config,
                                      const QuestionSpec& spec, uint64_t seed_base) {
    QuestionRecord record;
    record.entity = spec.entity;
    record.question = spec.question;
    record.candidate_claim = spec.candidate_claim;

    VerifiableClaim candidate;
    candidate.id = "candidate";
    candidate.text = spec.candidate_claim;
    candidate.source = ClaimSource::verified_pipeline;

    for (int i = 0; i < config.k_samples; ++i) {
        VoteRecord vote;
        DecodeParams params = gateway.profile(config.verify_profile).decode_defaults;
        params.temperature = config.verify_temperature;
        params.seed = seed_base + static_cast<uint64_t>(i);
        try {
            vote.answer = gateway.complete(config.verify_profile, spec.question, params).text;
        } catch (const RetryableError&) {
            vote.call_failed = true;
        } catch (const PermanentError&) {
            vote.call_failed = true;
        } catch (const ProtocolError&) {
            vote.call_failed = true;
        }
        if (!vote.call_failed && !trim(vote.answer).empty()) {
            ClaimSet answer_set;
            answer_set.provenance = Provenance::response_extracted;
            VerifiableClaim answer_claim;
            answer_claim.id = "answer";
            answer_claim.text = vote.answer;
            answer_claim.source = ClaimSource::extracted;
            answer_set.claims.push_back(std::move(answer_claim));
            try {
                auto verdict = verify_claim(gateway, config.verify_profile, candidate, answer_set,
                                            config.verify_options);
                vote.matched = verdict.label == SupportLabel::supported;
            } catch (const RetryableError&) {
                vote.call_failed = true;
            } catch (const PermanentError&) {
                vote.call_failed = true;
            } catch (const ProtocolError&) {
                vote.call_failed = true;
            }
        }
        if (vote.matched) ++record.true_votes;
        record.votes.push_back(std::move(vote));
    }
    record.verified = record.true_votes >= static_cast<size_t>(config.vote_threshold);
    return record;
}

std::string final_generation_prompt(const std::string& instruction, const ClaimSet& verified,
                                    const std::optional<std::string>& style_suffix) {
    if (verified.empty())
        throw PreconditionError("final_generation_prompt: verified claim set is empty");
    std::string out(prompts::kFinalTemplate);
    out = replace_all(std::move(out), "{instruction}", instruction);
    out = replace_all(std::move(out), "{claims}", render_claim_list(verified));
    if (style_suffix) {
        std::string style_line(prompts::kStyleSuffixTemplate);
        style_line = replace_all(std::move(style_line), "{style}", *style_suffix);
        out += "\n" + style_line;
    }
    return out;
}

PipelineTrace run_pipeline(Gateway& gateway, const PipelineConfig& config,
                           const PipelineInput& input) {
    config.validate();
    PipelineTrace trace;
    trace.id = input.id;
    trace.instruction = input.instruction;

    trace.draft_entities = draft_and_parse(gateway, config, input.instruction, &trace.draft_raw);
    auto questions = make_questions(gateway, config, input, trace.draft_entities,
                                    &trace.warnings);

    std::vector<VerifiableClaim> verified;
    for (const auto& q : questions) {
        uint64_t seed_base = derive_seed(config.seed, input.id + "|" + q.entity);
        auto record = self_consistent_verify(gateway, config, q, seed_base);
        if (record.verified) {
            VerifiableClaim c;
            c.id = "v" + std::to_string(verified.size() + 1);
            c.text = record.candidate_claim;
            c.source = ClaimSource::verified_pipeline;
            verified.push_back(std::move(c));
        }
        trace.questions.push_back(std::move(record));
    }
    trace.verified_claims = dedup_claims(verified, Provenance::response_extracted);

    if (trace.verified_claims.empty()) {
        trace.excluded = true;
        return trace;
    }
    std::string prompt =
        final_generation_prompt(input.instruction, trace.verified_claims, config.style_suffix);
    trace.final_response = gateway.complete(config.final_profile, prompt).text;
    return trace;
}

EvidencePrecision evidence_factual_precision(Gateway& gateway, const std::string& extractor,
                                             const std::string& judge,
                                             const std::string& evidence_provider,
                                             const std::string& response, int top_k) {
    EvidencePrecision out;
    auto extraction = extract_claims(gateway, extractor, response);
    out.warnings = extraction.warnings;
    out.total = extraction.claims.size();
    if (out.total == 0) {
        out.degenerate = true;
        return out;
    }
    out.verdicts.resize(out.total);

    parallel_for_indexed(out.total, 8, [&](size_t i) {
        const auto& claim = extraction.claims.claims[i];
        SupportVerdict v;
        v.claim_id = claim.id;
        try {
            auto snippets = gateway.fetch_evidence(evidence_provider, claim.text, top_k);
            if (snippets.empty()) {
                v.label = SupportLabel::unsupported;
                v.raw_judgment = "no evidence snippets";
            } else {
                ClaimSet snippet_set;
                snippet_set.provenance = Provenance::input_context;
                for (size_t s = 0; s < snippets.size(); ++s) {
                    VerifiableClaim sc;
                    sc.id = "e" + std::to_string(s + 1);
                    sc.text = snippets[s];
                    sc.source = ClaimSource::context;
                    snippet_set.claims.push_back(std::move(sc));
                }
                v = verify_claim(gateway, judge, claim, snippet_set);
            }
        } catch (const RetryableError& e) {
            v.label = SupportLabel::unsupported;
            v.call_failed = true;
            v.raw_judgment = e.what();
        } catch (const PermanentError& e) {
            v.label = SupportLabel::unsupported;
            v.call_failed = true;
            v.raw_judgment = e.what();
        } catch (const ProtocolError& e) {
            v.label = SupportLabel::unsupported;
            v.call_failed = true;
            v.raw_judgment = e.what();
        }
        out.verdicts[i] = std::move(v);
    });

    for (const auto& v : out.verdicts) {
        if (v.label == SupportLabel::supported) ++out.correct;
        if (v.call_failed)
            out.warnings.push_back("claim " + v.claim_id + ": evidence check failed, counted unsupported");
    }
    out.precision = static_cast<double>(out.correct) / static_cast<double>(out.total);
    return out;
}

std::string build_rag_prompt(const std::string& question, const ClaimSet& claims) {
    PicTask task;
    task.id = "rag";
    task.mode = TaskMode::partial;
    task.instruction = question + " " + std::string(prompts::kRagSuffix);
    task.claims = claims;
    return render_prompt(task);
}

RagSample rag_from_json(const nlohmann::json& j, size_t index_for_id) {
    RagSample s;
    if (j.contains("id") && j.at("id").is_string())
        s.id = j.at("id").get<std::string>();
    else
        s.id = "q" + std::to_string(index_for_id + 1);
    if (!j.contains("question") || !j.at("question").is_string())
        throw InputError("rag sample " + s.id + " missing string \"question\"");
    s.question = j.at("question").get<std::string>();
    if (!j.contains("answer_groups") || !j.at("answer_groups").is_array())
        throw InputError("rag sample " + s.id + " missing array \"answer_groups\"");
    for (const auto& g : j.at("answer_groups"))
        s.answer_groups.push_back(g.get<std::vector<std::string>>());
    if (!j.contains("claims") || !j.at("claims").is_array())
        throw InputError("rag sample " + s.id + " missing array \"claims\"");
    size_t idx = 0;
    for (const auto& cj : j.at("claims")) s.claims.claims.push_back(claim_from_json(cj, idx++));
    return s;
}

const std::vector<std::string>& birthplace_occupations() {
    static const std::vector<std::string> kOccupations = {
        "politician",  "artist",     "actor",      "scientist",            "writer",
        "entrepreneur", "journalist", "professional athlete", "activist", "singer"};
    return kOccupations;
}

const std::vector<std::string>& birthplace_locations() {
    static const std::vector<std::string> kLocations = {
        "San Francisco, California", "San Diego, California",   "Washington, D.C.",
        "Boulder, Colorado",         "Philadelphia, Pennsylvania", "Miami, Florida",
        "New York City, New York",   "Honolulu, Hawaii",        "Seattle, Washington",
        "Boston, Massachusetts",     "Chicago, Illinois",       "Baltimore, Maryland",
        "Los Angeles, California",   "Austin, Texas",           "Phoenix, Arizona",
        "Denver, Colorado",          "Las Vegas, Nevada",       "Portland, Oregon",
        "Atlanta, Georgia",          "Nashville, Tennessee",    "Charleston, South Carolina",
        "Minneapolis, Minnesota",    "Cleveland, Ohio",         "Milwaukee, Wisconsin",
        "Kansas City, Missouri",     "Detroit, Michigan",       "St. Louis, Missouri",
        "Columbus, Ohio",            "Charlotte, North Carolina"};
    return kLocations;
}

std::vector<BirthplaceSpec> birthplace_task_list() {
    std::vector<BirthplaceSpec> specs;
    for (const auto& occ : birthplace_occupations()) {
        for (const auto& loc : birthplace_locations()) specs.push_back({occ, loc});
    }
    return specs;
}

std::string birthplace_instruction(const BirthplaceSpec& spec) {
    std::string out(prompts::kBirthplaceInstructionTemplate);
    out = replace_all(std::move(out), "{occupation}", spec.occupation);
    out = replace_all(std::move(out), "{location}", spec.location);
    return out;
}

nlohmann::json trace_to_json(const PipelineTrace& t) {
    nlohmann::json questions = nlohmann::json::array();
    for (const auto& q : t.questions) {
        nlohmann::json votes = nlohmann::json::array();
        for (const auto& v : q.votes) {
            votes.push_back({{"answer", v.answer},
                             {"matched", v.matched},
                             {"call_failed", v.call_failed}});
        }
        questions.push_back({{"entity", q.entity},
                             {"question", q.question},
                             {"candidate_claim", q.candidate_claim},
                             {"votes", std::move(votes)},
                             {"true_votes", q.true_votes},
                             {"verified", q.verified}});
    }
    nlohmann::json verified = nlohmann::json::array();
    for (const auto& c : t.verified_claims.claims) verified.push_back(claim_to_json(c));
    return nlohmann::json{
        {"id", t.id},
        {"instruction", t.instruction},
        {"draft_raw", t.draft_raw},
        {"draft_entities", t.draft_entities},
        {"questions", std::move(questions)},
        {"verified_claims", std::move(verified)},
        {"final_response", t.final_response ? nlohmann::json(*t.final_response) : nullptr},
        {"excluded", t.excluded},
        {"warnings", t.warnings}};
}

} // namespace pic
