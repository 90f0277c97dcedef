#include "pic/config.hpp"

#include <algorithm>

#include "pic/errors.hpp"
#include "pic/mock_behaviors.hpp"
#include "pic/util.hpp"

namespace pic {

namespace {

DecodeParams decode_params_from_json(const nlohmann::json& j, DecodeParams base = {}) {
    if (j.contains("temperature")) base.temperature = j.at("temperature").get<double>();
    if (j.contains("top_p")) base.top_p = j.at("top_p").get<double>();
    if (j.contains("repetition_penalty"))
        base.repetition_penalty = j.at("repetition_penalty").get<double>();
    if (j.contains("max_tokens")) base.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("seed") && !j.at("seed").is_null())
        base.seed = j.at("seed").get<uint64_t>();
    return base;
}

ProfileSpec profile_spec_from_json(const nlohmann::json& j) {
    ProfileSpec spec;
    if (!j.contains("id") || !j.at("id").is_string())
        throw ConfigError("profile missing string \"id\"");
    spec.profile.id = j.at("id").get<std::string>();
    spec.profile.kind = backend_kind_from_string(j.value("kind", "mock"));
    spec.profile.base_url = j.value("base_url", "");
    spec.mock_behavior = j.value("behavior", "echo");
    if (j.contains("behavior_config")) spec.mock_config = j.at("behavior_config");
    spec.profile.model_name = j.value(
        "model_name",
        spec.profile.kind == BackendKind::mock ? "mock-" + spec.mock_behavior : "");
    if (j.contains("capabilities")) {
        spec.profile.capabilities.clear();
        for (const auto& c : j.at("capabilities"))
            spec.profile.capabilities.insert(capability_from_string(c.get<std::string>()));
    }
    if (j.contains("decode_defaults"))
        spec.profile.decode_defaults = decode_params_from_json(j.at("decode_defaults"));
    spec.profile.max_concurrency = j.value("max_concurrency", 4);
    spec.profile.credential_env_var = j.value("credential_env_var", "");
    if (j.contains("pricing")) {
        const auto& p = j.at("pricing");
        spec.profile.pricing.prompt_usd_per_mtok = p.value("prompt_usd_per_mtok", 0.0);
        spec.profile.pricing.completion_usd_per_mtok = p.value("completion_usd_per_mtok", 0.0);
    }
    spec.profile.validate();
    return spec;
}

EvidenceProfile evidence_from_json(const nlohmann::json& j) {
    EvidenceProfile p;
    if (!j.contains("id") || !j.at("id").is_string())
        throw ConfigError("evidence profile missing string \"id\"");
    p.id = j.at("id").get<std::string>();
    std::string kind = j.value("kind", "mock");
    if (kind == "mock") p.kind = EvidenceKind::mock;
    else if (kind == "serper_http") p.kind = EvidenceKind::serper_http;
    else throw ConfigError("unknown evidence kind \"" + kind + "\"");
    p.base_url = j.value("base_url", "");
    p.credential_env_var = j.value("credential_env_var", "");
    p.fixture_path = j.value("fixture_path", "");
    return p;
}

void apply_defaults_json(AppDefaults& d, const nlohmann::json& j) {
    if (j.contains("model")) d.model = j.at("model").get<std::string>();
    if (j.contains("extractor")) d.extractor = j.at("extractor").get<std::string>();
    if (j.contains("verifier")) d.verifier = j.at("verifier").get<std::string>();
    if (j.contains("sft")) d.sft = j.at("sft").get<std::string>();
    if (j.contains("ref")) d.ref = j.at("ref").get<std::string>();
    if (j.contains("draft")) d.draft = j.at("draft").get<std::string>();
    if (j.contains("pipeline_verifier"))
        d.pipeline_verifier = j.at("pipeline_verifier").get<std::string>();
    if (j.contains("final")) d.final_profile = j.at("final").get<std::string>();
    if (j.contains("evidence")) d.evidence = j.at("evidence").get<std::string>();
    if (j.contains("seed")) d.seed = j.at("seed").get<uint64_t>();
    if (j.contains("cache_dir") && !j.at("cache_dir").is_null())
        d.cache_dir = j.at("cache_dir").get<std::string>();
    if (j.contains("max_concurrency")) d.max_concurrency = j.at("max_concurrency").get<int>();
}

} // namespace

const ProfileSpec* AppConfig::find_profile(const std::string& id) const {
    for (const auto& spec : profiles)
        if (spec.profile.id == id) return &spec;
    return nullptr;
}

nlohmann::json redact_secrets(const nlohmann::json& j) {
    static const std::vector<std::string> kSecretKeys = {"api_key", "apikey", "secret",
                                                         "authorization", "password"};
    if (j.is_object()) {
        nlohmann::json out = nlohmann::json::object();
        for (const auto& [key, value] : j.items()) {
            std::string lower = to_lower_ascii(key);
            bool secret = std::find(kSecretKeys.begin(), kSecretKeys.end(), lower) !=
                          kSecretKeys.end();
            out[key] = secret ? nlohmann::json("[redacted]") : redact_secrets(value);
        }
        return out;
    }
    if (j.is_array()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& v : j) out.push_back(redact_secrets(v));
        return out;
    }
    return j;
}

AppConfig app_config_from_json(const nlohmann::json& j) {
    AppConfig config;
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    if (j.contains("profiles")) {
        for (const auto& pj : j.at("profiles")) {
            auto spec = profile_spec_from_json(pj);
            if (config.find_profile(spec.profile.id))
                throw ConfigError("duplicate profile id \"" + spec.profile.id + "\"");
            config.profiles.push_back(std::move(spec));
        }
    }
    if (j.contains("evidence")) {
        for (const auto& ej : j.at("evidence")) {
            auto ev = evidence_from_json(ej);
            for (const auto& existing : config.evidence)
                if (existing.id == ev.id)
                    throw ConfigError("duplicate evidence id \"" + ev.id + "\"");
            config.evidence.push_back(std::move(ev));
        }
    }
    if (j.contains("defaults")) apply_defaults_json(config.defaults, j.at("defaults"));
    config.source = redact_secrets(j);
    return config;
}

AppConfig load_app_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return app_config_from_json(j);
}

AppConfig default_offline_config() {
    nlohmann::json j = {
        {"profiles",
         {{{"id", "model"},
           {"behavior", "identity_model"},
           {"capabilities", {"complete", "score_logprobs"}},
           {"behavior_config", {{"logprob_mode", "hashed"}}}},
          {{"id", "extractor"}, {"behavior", "rule_extractor"}},
          {{"id", "verifier"}, {"behavior", "containment_verifier"}},
          {{"id", "ref"},
           {"behavior", "identity_model"},
           {"capabilities", {"complete", "score_logprobs"}},
           {"behavior_config", {{"logprob_mode", "hashed"}}}},
          {{"id", "pipeline"}, {"behavior", "birthplace_demo"}}}},
        {"evidence", {{{"id", "search"}, {"kind", "mock"}}}},
        {"defaults", {{"model", "model"}, {"sft", "model"}}}};
    return app_config_from_json(j);
}

std::unique_ptr<Gateway> build_gateway(const AppConfig& config, const GatewayOptions& options) {
    auto gateway = std::make_unique<Gateway>(options);
    for (const auto& spec : config.profiles) {
        std::shared_ptr<Backend> backend;
        if (spec.profile.kind == BackendKind::mock)
            backend = make_mock_backend(spec.mock_behavior, spec.mock_config);
        else
            backend = make_http_backend(spec.profile);
        gateway->add_profile(spec.profile, backend);
    }
    for (const auto& ev : config.evidence) {
        std::shared_ptr<EvidenceBackend> backend;
        if (ev.kind == EvidenceKind::mock) {
            if (!ev.fixture_path.empty())
                backend = MockEvidenceBackend::from_file(ev.fixture_path);
            else
                backend = std::make_shared<MockEvidenceBackend>(
                    std::map<std::string, std::vector<std::string>>{});
        } else {
            backend = make_serper_backend(ev);
        }
        gateway->add_evidence(ev, backend);
    }
    return gateway;
}

} // namespace pic
