// HTTP transports: OpenAI-compatible chat/completions plus the echo+logprobs
// scoring convention, and the Serper-shaped evidence endpoint. Kept in one
// translation unit so httplib is compiled exactly once.

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pic/errors.hpp"
#include "pic/gateway.hpp"
#include "pic/util.hpp"

namespace pic {

namespace {

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string prefix; // path prefix, possibly empty
};

SplitUrl split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("base_url must include a scheme: " + base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.origin = base_url;
    } else {
        out.origin = base_url.substr(0, path_start);
        out.prefix = base_url.substr(path_start);
        while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    }
    return out;
}

int parse_retry_after_ms(const httplib::Result& res) {
    if (!res->has_header("Retry-After")) return 0;
    try {
        return static_cast<int>(std::stod(res->get_header_value("Retry-After")) * 1000.0);
    } catch (...) {
        return 0;
    }
}

std::string body_snippet(const std::string& body) {
    std::string s = trim(body);
    if (s.size() > 200) s = s.substr(0, 200) + "...";
    return s;
}

// Maps one HTTP outcome to the gateway error taxonomy and returns the parsed
// body on success.
nlohmann::json handle_response(const httplib::Result& res, const std::string& what) {
    if (!res) {
        throw RetryableError(what + ": transport error: " + httplib::to_string(res.error()), 0);
    }
    int status = res->status;
    if (status == 429) {
        throw RetryableError(what + ": rate limited (429)", 429, parse_retry_after_ms(res));
    }
    if (status >= 500) {
        throw RetryableError(what + ": server error (" + std::to_string(status) + ")", status);
    }
    if (status >= 400) {
        throw PermanentError(
            what + ": request rejected (" + std::to_string(status) + "): " + body_snippet(res->body),
            status);
    }
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw ProtocolError(what + ": response body is not valid JSON");
    return j;
}

class HttpBackend : public Backend {
public:
    explicit HttpBackend(const BackendProfile& profile)
        : profile_(profile), url_(split_base_url(profile.base_url)) {}

    BackendResult complete(const std::string& prompt, const DecodeParams& params) override {
        nlohmann::json body{
            {"model", profile_.model_name},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
            {"temperature", params.temperature},
            {"top_p", params.top_p},
            {"repetition_penalty", params.repetition_penalty},
            {"max_tokens", params.max_tokens}};
        if (params.seed) body["seed"] = *params.seed;

        auto res = post("/chat/completions", body);
        auto j = handle_response(res, "complete(" + profile_.id + ")");
        BackendResult out;
        try {
            out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError("complete(" + profile_.id + "): malformed choices: " + e.what());
        }
        read_usage(j, out.usage);
        return out;
    }

    BackendResult score(const std::string& prompt, const std::string& completion) override {
        // Echo scoring: send prompt+completion, ask for logprobs of the echoed
        // text, keep the entries whose text offset lies inside the completion.
        nlohmann::json body{{"model", profile_.model_name},
                            {"prompt", prompt + completion},
                            {"max_tokens", 0},
                            {"temperature", 0.0},
                            {"logprobs", 1},
                            {"echo", true}};
        auto res = post("/completions", body);
        auto j = handle_response(res, "score(" + profile_.id + ")");
        BackendResult out;
        try {
            const auto& lp = j.at("choices").at(0).at("logprobs");
            const auto& tokens = lp.at("tokens");
            const auto& probs = lp.at("token_logprobs");
            const auto& offsets = lp.at("text_offset");
            if (tokens.size() != probs.size() || tokens.size() != offsets.size())
                throw ProtocolError("score(" + profile_.id + "): ragged logprob arrays");
            std::vector<TokenLogprob> tl;
            for (size_t i = 0; i < tokens.size(); ++i) {
                if (offsets[i].get<size_t>() < prompt.size()) continue;
                if (probs[i].is_null())
                    throw ProtocolError("score(" + profile_.id +
                                        "): null logprob inside the completion span");
                tl.push_back({tokens[i].get<std::string>(), probs[i].get<double>()});
            }
            out.token_logprobs = std::move(tl);
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError("score(" + profile_.id + "): malformed logprobs: " + e.what());
        }
        read_usage(j, out.usage);
        return out;
    }

private:
    httplib::Result post(const std::string& path, const nlohmann::json& body) {
        httplib::Client cli(url_.origin);
        cli.set_connection_timeout(10, 0);
        cli.set_read_timeout(300, 0);
        cli.set_write_timeout(300, 0);
        httplib::Headers headers;
        if (const char* key = std::getenv(profile_.resolved_credential_env().c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
        return cli.Post(url_.prefix + path, headers, body.dump(), "application/json");
    }

    void read_usage(const nlohmann::json& j, Usage& usage) {
        if (!j.contains("usage") || !j.at("usage").is_object()) return;
        const auto& u = j.at("usage");
        if (u.contains("prompt_tokens") && u.at("prompt_tokens").is_number())
            usage.prompt_tokens = u.at("prompt_tokens").get<uint64_t>();
        if (u.contains("completion_tokens") && u.at("completion_tokens").is_number())
            usage.completion_tokens = u.at("completion_tokens").get<uint64_t>();
    }

    BackendProfile profile_;
    SplitUrl url_;
};

class SerperEvidenceBackend : public EvidenceBackend {
public:
    explicit SerperEvidenceBackend(const EvidenceProfile& profile)
        : profile_(profile), url_(split_base_url(profile.base_url)) {}

    std::vector<std::string> fetch(const std::string& query, int top_k) override {
        httplib::Client cli(url_.origin);
        cli.set_connection_timeout(10, 0);
        cli.set_read_timeout(60, 0);
        httplib::Headers headers;
        if (!profile_.credential_env_var.empty()) {
            if (const char* key = std::getenv(profile_.credential_env_var.c_str()))
                headers.emplace("X-API-KEY", key);
        }
        nlohmann::json body{{"q", query}};
        std::string path = url_.prefix.empty() ? "/search" : url_.prefix;
        auto res = cli.Post(path, headers, body.dump(), "application/json");
        auto j = handle_response(res, "evidence(" + profile_.id + ")");
        std::vector<std::string> snippets;
        if (j.contains("organic") && j.at("organic").is_array()) {
            for (const auto& hit : j.at("organic")) {
                if (static_cast<int>(snippets.size()) >= top_k) break;
                if (hit.contains("snippet") && hit.at("snippet").is_string())
                    snippets.push_back(hit.at("snippet").get<std::string>());
            }
        }
        return snippets;
    }

private:
    EvidenceProfile profile_;
    SplitUrl url_;
};

} // namespace

std::shared_ptr<Backend> make_http_backend(const BackendProfile& profile) {
    return std::make_shared<HttpBackend>(profile);
}

std::shared_ptr<EvidenceBackend> make_serper_backend(const EvidenceProfile& profile) {
    return std::make_shared<SerperEvidenceBackend>(profile);
}

} // namespace pic
