#include "pic/prefdata.hpp"

#include <algorithm>
#include <cmath>

#include "pic/errors.hpp"

namespace pic {

std::string to_string(TaskFamily f) {
    switch (f) {
        case TaskFamily::general: return "general";
        case TaskFamily::biography: return "biography";
        case TaskFamily::summarization: return "summarization";
        case TaskFamily::qa: return "qa";
        case TaskFamily::other: return "other";
    }
    throw std::logic_error("unknown TaskFamily");
}

TaskFamily task_family_from_string(const std::string& s) {
    if (s == "general") return TaskFamily::general;
    if (s == "biography") return TaskFamily::biography;
    if (s == "summarization") return TaskFamily::summarization;
    if (s == "qa") return TaskFamily::qa;
    if (s == "other") return TaskFamily::other;
    throw InputError("unknown task family: " + s);
}

std::string to_string(DropReason r) {
    switch (r) {
        case DropReason::none: return "none";
        case DropReason::missing_gold: return "missing_gold";
        case DropReason::missing_context: return "missing_context";
        case DropReason::too_short: return "too_short";
        case DropReason::no_claims: return "no_claims";
        case DropReason::low_score: return "low_score";
    }
    throw std::logic_error("unknown DropReason");
}

std::string to_string(PrefBranch b) {
    return b == PrefBranch::original_preferred ? "original_preferred" : "perturbed_preferred";
}

std::string to_string(PrefSkipReason r) {
    return r == PrefSkipReason::none ? "none" : "no_contrast";
}

double filter_threshold(TaskFamily family) {
    return family == TaskFamily::biography ? kScoreThresholdBiography : kScoreThresholdDefault;
}

ConvertOutcome convert_and_filter(Gateway& gateway, const EvalProfiles& profiles,
                                  const RawSample& raw, const EvalOptions& options) {
    ConvertOutcome out;
    if (!raw.gold_response) {
        out.reason = DropReason::missing_gold;
        return out;
    }
    if (raw.gold_response->size() < kMinResponseChars) {
        out.reason = DropReason::too_short;
        return out;
    }

    std::string claim_source_text;
    Provenance provenance;
    ClaimSource source;
    if (raw.mode == TaskMode::full) {
        claim_source_text = *raw.gold_response;
        provenance = Provenance::gold_derived;
        source = ClaimSource::gold_response;
    } else {
        if (!raw.context) {
            out.reason = DropReason::missing_context;
            return out;
        }
        claim_source_text = *raw.context;
        provenance = Provenance::input_context;
        source = ClaimSource::context;
    }

    auto extraction = extract_claims(gateway, profiles.extractor, claim_source_text,
                                     options.extract);
    ClaimSet claims = std::move(extraction.claims);
    claims.provenance = provenance;
    for (auto& c : claims.claims) c.source = source;
    if (claims.empty()) {
        out.reason = DropReason::no_claims;
        return out;
    }

    PicTask task;
    task.id = raw.id;
    task.mode = raw.mode;
    task.instruction = raw.instruction;
    task.claims = claims;

    auto eval = evaluate_response(gateway, profiles, task, *raw.gold_response, options);
    double score;
    if (raw.mode == TaskMode::full) {
        score = eval.score.f1_at_k;
    } else {
        score = eval.score.precision ? *eval.score.precision : 0.0;
    }
    out.score = score;

    if (score < filter_threshold(raw.family) - kScoreTolerance) {
        out.reason = DropReason::low_score;
        return out;
    }

    SftSample sample;
    sample.id = raw.id;
    sample.instruction = raw.instruction;
    sample.claims = std::move(claims);
    sample.response = *raw.gold_response;
    sample.family = raw.family;
    sample.mode = raw.mode;
    sample.pic_score_at_filter = score;
    out.sample = std::move(sample);
    return out;
}

void PerturbParams::validate() const {
    if (!(p_min > 0.0 && p_min <= p_max && p_max <= 1.0))
        throw ConfigError("perturbation requires 0 < p_min <= p_max <= 1");
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
    if (last_l < 1) throw ConfigError("last_l must be >= 1");
}

PerturbResult perturb_claims(const ClaimSet& claims, const PerturbParams& params, Rng& rng) {
    params.validate();
    PerturbResult result;
    const size_t k = claims.size();
    if (k <= 1) {
        result.perturbed = claims;
        return result;
    }

    auto m_min = static_cast<size_t>(
        std::max(1.0, std::floor(params.p_min * static_cast<double>(k))));
    auto m_max = static_cast<size_t>(std::min(static_cast<double>(k - 1),
                                              std::floor(params.p_max * static_cast<double>(k))));
    // floor(p_max * k) can be 0 for tiny p_max; a no-op perturbation is never
    // allowed for k >= 2, so at least one claim is always dropped.
    if (m_max < 1) m_max = 1;
    if (m_min > m_max) m_min = m_max;
    size_t m = m_min + rng.index(m_max - m_min + 1);

    // Partial Fisher-Yates: the first m slots become the dropped indices.
    std::vector<size_t> idx(k);
    for (size_t i = 0; i < k; ++i) idx[i] = i;
    for (size_t j = 0; j < m; ++j) {
        size_t swap_with = j + rng.index(k - j);
        std::swap(idx[j], idx[swap_with]);
    }
    std::vector<bool> dropped(k, false);
    for (size_t j = 0; j < m; ++j) dropped[idx[j]] = true;

    result.perturbed.provenance = claims.provenance;
    for (size_t i = 0; i < k; ++i) {
        if (dropped[i]) {
            result.dropped_claim_ids.push_back(claims.claims[i].id);
        } else {
            result.perturbed.claims.push_back(claims.claims[i]);
        }
    }
    return result;
}

double mean_last_l(const std::vector<TokenLogprob>& tokens, int last_l) {
    if (tokens.empty()) throw PreconditionError("mean_last_l: empty token sequence");
    if (last_l < 1) throw PreconditionError("mean_last_l: last_l must be >= 1");
    size_t take = std::min(static_cast<size_t>(last_l), tokens.size());
    double sum = 0.0;
    for (size_t i = tokens.size() - take; i < tokens.size(); ++i) sum += tokens[i].logprob;
    return sum / static_cast<double>(take);
}

double normalized_drop(const std::vector<TokenLogprob>& orig,
                       const std::vector<TokenLogprob>& perturbed, int last_l) {
    double delta = mean_last_l(orig, last_l) - mean_last_l(perturbed, last_l);
    return sigmoid(delta);
}

PrefOutcome build_preference(Gateway& gateway, const PrefProfiles& profiles,
                             const SftSample& sample, const PerturbParams& params) {
    params.validate();
    PrefOutcome out;

    Rng rng(derive_seed(params.seed, sample.id));
    auto perturb = perturb_claims(sample.claims, params, rng);

    PicTask perturbed_task;
    perturbed_task.id = sample.id;
    perturbed_task.mode = sample.mode;
    perturbed_task.instruction = sample.instruction;
    perturbed_task.claims = perturb.perturbed;

    std::string y_perturb = gateway.complete(profiles.sft_profile,
                                             render_prompt(perturbed_task))
                                .text;
    const std::string& y_orig = sample.response;
    if (y_perturb == y_orig) {
        out.skip = PrefSkipReason::no_contrast;
        return out;
    }

    // Likelihood drop is measured against the instruction alone; the claim
    // lists stay out of the scoring context.
    std::string scoring_prompt = sample.instruction + "\n";
    auto lp_orig = gateway.score_logprobs(profiles.ref_profile, scoring_prompt, y_orig);
    auto lp_pert = gateway.score_logprobs(profiles.ref_profile, scoring_prompt, y_perturb);
    double z = normalized_drop(lp_orig, lp_pert, params.last_l);

    PrefTuple tuple;
    tuple.id = sample.id;
    tuple.instruction = sample.instruction;
    tuple.drop_score = z;
    tuple.dropped_claim_ids = perturb.dropped_claim_ids;
    if (z > params.tau) {
        tuple.branch = PrefBranch::original_preferred;
        tuple.claims = sample.claims;
        tuple.chosen = y_orig;
        tuple.rejected = y_perturb;
    } else {
        tuple.branch = PrefBranch::perturbed_preferred;
        tuple.claims = perturb.perturbed;
        tuple.chosen = y_perturb;
        tuple.rejected = y_orig;
    }
    out.tuple = std::move(tuple);
    return out;
}

nlohmann::json sft_to_json(const SftSample& s) {
    nlohmann::json claims = nlohmann::json::array();
    for (const auto& c : s.claims.claims) claims.push_back(claim_to_json(c));
    return nlohmann::json{{"id", s.id},
                          {"instruction", s.instruction},
                          {"claims", std::move(claims)},
                          {"response", s.response},
                          {"task_family", to_string(s.family)},
                          {"mode", to_string(s.mode)}};
}

SftSample sft_from_json(const nlohmann::json& j, size_t index_for_id) {
    SftSample s;
    if (j.contains("id") && j.at("id").is_string())
        s.id = j.at("id").get<std::string>();
    else
        s.id = "s" + std::to_string(index_for_id + 1);
    s.instruction = j.at("instruction").get<std::string>();
    size_t idx = 0;
    for (const auto& cj : j.at("claims")) s.claims.claims.push_back(claim_from_json(cj, idx++));
    s.response = j.at("response").get<std::string>();
    if (j.contains("task_family") && j.at("task_family").is_string())
        s.family = task_family_from_string(j.at("task_family").get<std::string>());
    if (j.contains("mode") && j.at("mode").is_string())
        s.mode = task_mode_from_string(j.at("mode").get<std::string>());
    return s;
}

nlohmann::json pref_to_json(const PrefTuple& t) {
    nlohmann::json claims = nlohmann::json::array();
    for (const auto& c : t.claims.claims) claims.push_back(claim_to_json(c));
    return nlohmann::json{{"id", t.id},
                          {"instruction", t.instruction},
                          {"claims", std::move(claims)},
                          {"chosen", t.chosen},
                          {"rejected", t.rejected},
                          {"drop_score", t.drop_score},
                          {"branch", to_string(t.branch)},
                          {"dropped_claim_ids", t.dropped_claim_ids}};
}

RawSample raw_from_json(const nlohmann::json& j, size_t index_for_id) {
    RawSample r;
    if (j.contains("id") && j.at("id").is_string())
        r.id = j.at("id").get<std::string>();
    else
        r.id = "r" + std::to_string(index_for_id + 1);
    if (!j.contains("instruction") || !j.at("instruction").is_string())
        throw InputError("raw sample " + r.id + " missing string \"instruction\"");
    r.instruction = j.at("instruction").get<std::string>();
    if (j.contains("context") && j.at("context").is_string())
        r.context = j.at("context").get<std::string>();
    if (j.contains("response") && j.at("response").is_string())
        r.gold_response = j.at("response").get<std::string>();
    if (j.contains("family") && j.at("family").is_string())
        r.family = task_family_from_string(j.at("family").get<std::string>());
    if (j.contains("mode") && j.at("mode").is_string())
        r.mode = task_mode_from_string(j.at("mode").get<std::string>());
    return r;
}

} // namespace pic
