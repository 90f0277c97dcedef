#include "pic/verification.hpp"

#include <cctype>

#include "pic/errors.hpp"
#include "pic/util.hpp"

namespace pic {

std::string to_string(SupportLabel l) {
    return l == SupportLabel::supported ? "supported" : "unsupported";
}

std::optional<ParsedJudgment> parse_judgment(const std::string& completion) {
    std::string first_line;
    for (const auto& raw : split_lines(completion)) {
        std::string line = trim(raw);
        if (!line.empty()) {
            first_line = std::move(line);
            break;
        }
    }
    if (first_line.empty()) return std::nullopt;

    ParsedJudgment parsed;
    if (starts_with_icase(first_line, "unsupported")) {
        parsed.label = SupportLabel::unsupported;
    } else if (starts_with_icase(first_line, "supported")) {
        parsed.label = SupportLabel::supported;
    } else {
        return std::nullopt;
    }

    size_t i = 0;
    while (i < first_line.size()) {
        if (std::isdigit(static_cast<unsigned char>(first_line[i]))) {
            size_t b = i;
            while (i < first_line.size() && std::isdigit(static_cast<unsigned char>(first_line[i])))
                ++i;
            parsed.evidence_indices.push_back(std::stoull(first_line.substr(b, i - b)));
        } else {
            ++i;
        }
    }
    return parsed;
}

SupportVerdict verify_claim(Gateway& gateway, const std::string& verifier_profile,
                            const VerifiableClaim& claim, const ClaimSet& against,
                            const VerifyOptions& options) {
    if (against.empty())
        throw PreconditionError("verify_claim: context claim set is empty");

    std::string prompt = options.prompt_template;
    prompt = replace_all(std::move(prompt), "{context}", render_claim_list(against));
    prompt = replace_all(std::move(prompt), "{claim}", claim.text);

    SupportVerdict verdict;
    verdict.claim_id = claim.id;

    std::string completion = gateway.complete(verifier_profile, prompt).text;
    auto parsed = parse_judgment(completion);
    if (!parsed) {
        // One retry, past the cache so a stochastic backend gets a fresh shot.
        completion = gateway.complete(verifier_profile, prompt, std::nullopt, {.bypass_cache = true})
                         .text;
        parsed = parse_judgment(completion);
    }
    verdict.raw_judgment = completion;
    if (!parsed) {
        verdict.label = SupportLabel::unsupported;
        verdict.parse_failed = true;
        return verdict;
    }

    verdict.label = parsed->label;
    if (verdict.label == SupportLabel::supported) {
        for (size_t idx : parsed->evidence_indices) {
            if (idx >= 1 && idx <= against.size())
                verdict.evidence_ids.push_back(against.claims[idx - 1].id);
        }
    }
    return verdict;
}

BatchVerdict verify_batch(Gateway& gateway, const std::string& verifier_profile,
                          const ClaimSet& claims, const ClaimSet& against,
                          const VerifyOptions& options) {
    if (against.empty())
        throw PreconditionError("verify_batch: context claim set is empty");

    BatchVerdict batch;
    batch.verdicts.resize(claims.size());
    if (claims.empty()) return batch;

    auto flag_failure = [&](size_t i, const std::exception& e) {
        SupportVerdict v;
        v.claim_id = claims.claims[i].id;
        v.label = SupportLabel::unsupported;
        v.call_failed = true;
        v.raw_judgment = e.what();
        batch.verdicts[i] = std::move(v);
    };
    // Backend failures degrade to unsupported; wiring mistakes (ConfigError,
    // PreconditionError) still propagate.
    parallel_for_indexed(claims.size(), options.max_parallel, [&](size_t i) {
        try {
            batch.verdicts[i] = verify_claim(gateway, verifier_profile, claims.claims[i], against,
                                             options);
        } catch (const RetryableError& e) {
            flag_failure(i, e);
        } catch (const PermanentError& e) {
            flag_failure(i, e);
        } catch (const ProtocolError& e) {
            flag_failure(i, e);
        }
    });

    for (const auto& v : batch.verdicts) {
        if (v.label == SupportLabel::supported) {
            ++batch.supported;
        } else {
            ++batch.unsupported;
        }
        if (v.parse_failed)
            batch.warnings.push_back("claim " + v.claim_id + ": judgment unparseable, counted unsupported");
        if (v.call_failed)
            batch.warnings.push_back("claim " + v.claim_id + ": verification call failed, counted unsupported");
    }
    return batch;
}

} // namespace pic
