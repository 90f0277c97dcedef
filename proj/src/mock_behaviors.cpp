#include "pic/mock_behaviors.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>

#include "pic/claims.hpp"
#include "pic/errors.hpp"
#include "pic/pipeline.hpp"
#include "pic/prompts.hpp"
#include "pic/util.hpp"

namespace pic {

std::vector<std::string> parse_prompt_claims(const std::string& prompt) {
    size_t pos = prompt.rfind("Claims:");
    if (pos == std::string::npos) return {};
    std::string block = prompt.substr(pos + 7);
    size_t stop = block.find("\nResponse:");
    if (stop != std::string::npos) block = block.substr(0, stop);
    return parse_numbered_list(block);
}

namespace {

std::string join_claims(const std::vector<std::string>& texts, size_t count) {
    std::string out;
    for (size_t i = 0; i < count && i < texts.size(); ++i) {
        if (!out.empty()) out += " ";
        out += texts[i];
    }
    return out;
}

// Text between two markers, or empty when either is missing.
std::string slice_between(const std::string& text, std::string_view from, std::string_view to) {
    size_t a = text.find(from);
    if (a == std::string::npos) return {};
    a += from.size();
    size_t b = text.find(to, a);
    if (b == std::string::npos) return {};
    return text.substr(a, b - a);
}

struct VerifyParts {
    std::vector<std::string> context;
    std::string candidate;
    bool ok = false;
};

VerifyParts parse_verify_prompt(const std::string& prompt) {
    VerifyParts parts;
    std::string block = slice_between(prompt, "Context claims:\n", "\n\nCandidate claim: ");
    std::string candidate = slice_between(prompt, "Candidate claim: ", "\nAnswer:");
    if (block.empty() || candidate.empty()) return parts;
    parts.context = parse_numbered_list(block);
    parts.candidate = candidate;
    parts.ok = !parts.context.empty();
    return parts;
}

MockBackend::Handler echo_handler() {
    return [](const std::string& prompt, const DecodeParams&) { return prompt; };
}

MockBackend::Handler static_handler(const nlohmann::json& config) {
    std::string text = config.value("text", "");
    return [text](const std::string&, const DecodeParams&) { return text; };
}

MockBackend::Handler fixture_handler(const nlohmann::json& config) {
    auto responses = std::make_shared<std::map<std::string, std::string>>();
    if (config.contains("responses")) {
        for (const auto& [k, v] : config.at("responses").items())
            (*responses)[k] = v.get<std::string>();
    }
    std::string fallback = config.value("default", "");
    return [responses, fallback](const std::string& prompt, const DecodeParams&) {
        auto it = responses->find(prompt);
        return it != responses->end() ? it->second : fallback;
    };
}

MockBackend::Handler identity_handler(bool drop_last) {
    return [drop_last](const std::string& prompt, const DecodeParams&) {
        auto texts = parse_prompt_claims(prompt);
        if (texts.empty()) return std::string{};
        size_t count = drop_last && texts.size() > 0 ? texts.size() - 1 : texts.size();
        return join_claims(texts, count);
    };
}

MockBackend::Handler rule_extractor_handler() {
    return [](const std::string& prompt, const DecodeParams&) -> std::string {
        std::string focus = slice_between(prompt, "Focus sentence: ", "\nNext sentence: ");
        focus = trim(focus);
        if (focus.empty() || focus == "(none)") return "None";
        return "- " + focus;
    };
}

MockBackend::Handler containment_verifier_handler(const nlohmann::json& config) {
    std::string marker = config.value("unsupported_marker", "");
    return [marker](const std::string& prompt, const DecodeParams&) -> std::string {
        if (prompt.find("\nClaim A: ") != std::string::npos) return "no";
        auto parts = parse_verify_prompt(prompt);
        if (!parts.ok) return "unsupported";
        std::string cand = normalized_text(parts.candidate);
        if (!marker.empty() && cand.find(to_lower_ascii(marker)) != std::string::npos)
            return "unsupported";
        for (size_t i = 0; i < parts.context.size(); ++i) {
            std::string ctx = normalized_text(parts.context[i]);
            if (ctx.find(cand) != std::string::npos || cand.find(ctx) != std::string::npos)
                return "supported " + std::to_string(i + 1);
        }
        return "unsupported";
    };
}

// Entity + "born" + location containment against the one-claim context; the
// judge half of the birthplace behaviors.
std::optional<std::string> birthplace_judge_reply(const std::string& prompt) {
    if (prompt.find("\nClaim A: ") != std::string::npos) return "no";
    auto parts = parse_verify_prompt(prompt);
    if (!parts.ok) return std::nullopt;
    // Candidate shape: "{entity} is a {occupation} born in {location}."
    size_t is_a = parts.candidate.find(" is a ");
    size_t born = parts.candidate.find(" born in ");
    if (is_a == std::string::npos || born == std::string::npos || born < is_a)
        return "unsupported";
    std::string entity = parts.candidate.substr(0, is_a);
    std::string location = trim(parts.candidate.substr(born + 9));
    if (!location.empty() && location.back() == '.') location.pop_back();
    std::string entity_n = normalized_text(entity);
    std::string location_n = normalized_text(location);
    for (size_t i = 0; i < parts.context.size(); ++i) {
        std::string answer = normalized_text(parts.context[i]);
        if (answer.find(entity_n) != std::string::npos &&
            answer.find("born") != std::string::npos &&
            answer.find(location_n) != std::string::npos)
            return "supported " + std::to_string(i + 1);
    }
    return "unsupported";
}

// The worked birthplace example: draft list, per-entity answer scripts
// (successive calls for the same question walk the script), judging, final
// response. One behavior covers every role so a single profile can run the
// whole pipeline, the way one real model would.
MockBackend::Handler birthplace_demo_handler() {
    const std::string mccain_false =
        "John McCain, the American politician and naval officer, was born on August 29, 1936, "
        "at Coco Solo Naval Air Station in the Panama Canal Zone.";
    const std::string mccain_long =
        "John McCain, the American politician who served as a United States Senator from "
        "Arizona from 1987 until his death in 2018, was born on August 29, 1936, at Coco Solo "
        "Naval Air Station in the Panama Canal Zone.";
    auto scripts = std::make_shared<std::map<std::string, std::vector<std::string>>>();
    (*scripts)["John McCain"] = {mccain_false, "John McCain was born in Phoenix, Arizona.",
                                 mccain_false, mccain_long, mccain_false};
    (*scripts)["Barry Goldwater"] = {"Barry Goldwater was born in Phoenix, Arizona."};
    (*scripts)["Kyrsten Sinema"] = {"Kyrsten Sinema was born in Tucson, Arizona."};

    auto mu = std::make_shared<std::mutex>();
    auto counts = std::make_shared<std::map<std::string, size_t>>();

    return [=](const std::string& prompt, const DecodeParams&) -> std::string {
        if (auto judged = birthplace_judge_reply(prompt)) return *judged;
        if (prompt.find(prompts::kDraftDirective) != std::string::npos)
            return "1. John McCain\n2. Barry Goldwater\n3. Kyrsten Sinema";
        if (starts_with_icase(prompt, "Where was the ")) {
            std::string body = prompt.substr(14);
            size_t end = body.rfind(" born?");
            if (end != std::string::npos) body = body.substr(0, end);
            std::string entity = body;
            for (const auto& occ : birthplace_occupations()) {
                if (body.size() > occ.size() + 1 && body.compare(0, occ.size(), occ) == 0 &&
                    body[occ.size()] == ' ') {
                    entity = body.substr(occ.size() + 1);
                    break;
                }
            }
            auto it = scripts->find(entity);
            if (it == scripts->end()) return entity + " was born in Springfield.";
            std::lock_guard<std::mutex> lock(*mu);
            size_t n = (*counts)[prompt]++;
            return it->second[n % it->second.size()];
        }
        if (starts_with_icase(prompt, "Your task is to complete the instruction.")) {
            auto texts = parse_prompt_claims(prompt);
            if (texts.empty()) return "";
            return "From the given claims, " + join_claims(texts, texts.size());
        }
        return "";
    };
}

MockBackend::Handler birthplace_judge_handler() {
    return [](const std::string& prompt, const DecodeParams&) -> std::string {
        if (auto judged = birthplace_judge_reply(prompt)) return *judged;
        return "unsupported";
    };
}

} // namespace

std::shared_ptr<MockBackend> make_mock_backend(const std::string& behavior,
                                               const nlohmann::json& config) {
    MockBackend::Handler handler;
    if (behavior == "echo") handler = echo_handler();
    else if (behavior == "static_text") handler = static_handler(config);
    else if (behavior == "fixture") handler = fixture_handler(config);
    else if (behavior == "identity_model") handler = identity_handler(false);
    else if (behavior == "drop_last_model") handler = identity_handler(true);
    else if (behavior == "rule_extractor") handler = rule_extractor_handler();
    else if (behavior == "containment_verifier") handler = containment_verifier_handler(config);
    else if (behavior == "birthplace_demo") handler = birthplace_demo_handler();
    else if (behavior == "birthplace_judge") handler = birthplace_judge_handler();
    else throw ConfigError("unknown mock behavior \"" + behavior + "\"");

    auto backend = std::make_shared<MockBackend>(std::move(handler));
    std::string mode = config.value("logprob_mode", "constant");
    if (mode == "hashed")
        backend->set_logprob_hashed(config.value("logprob_offset", 0.0));
    else if (mode == "constant")
        backend->set_logprob_constant(config.value("logprob_value", -1.0));
    else
        throw ConfigError("unknown logprob_mode \"" + mode + "\"");
    if (config.contains("latency_ms")) backend->set_latency_ms(config.at("latency_ms").get<int>());
    return backend;
}

const std::vector<std::string>& mock_behavior_names() {
    static const std::vector<std::string> kNames = {
        "echo",           "static_text",          "fixture",
        "identity_model", "drop_last_model",      "rule_extractor",
        "containment_verifier", "birthplace_demo", "birthplace_judge"};
    return kNames;
}

} // namespace pic
