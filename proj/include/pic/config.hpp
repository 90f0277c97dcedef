#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pic/gateway.hpp"

namespace pic {

// Role -> profile id bindings plus run-wide knobs. Flags beat these, these
// beat the built-in values.
struct AppDefaults {
    std::string model = "model";         // model under test
    std::string extractor = "extractor";
    std::string verifier = "verifier";
    std::string sft = "model";           // theta_SFT
    std::string ref = "ref";             // theta_Ref (scoring)
    std::string draft = "pipeline";
    std::string pipeline_verifier = "pipeline";
    std::string final_profile = "pipeline";
    std::string evidence = "search";
    uint64_t seed = 0;
    std::optional<std::string> cache_dir;
    std::optional<int> max_concurrency; // global in-flight cap
};

struct ProfileSpec {
    BackendProfile profile;
    std::string mock_behavior = "echo";  // kind == mock only
    nlohmann::json mock_config = nlohmann::json::object();
};

struct AppConfig {
    std::vector<ProfileSpec> profiles;
    std::vector<EvidenceProfile> evidence;
    AppDefaults defaults;
    nlohmann::json source; // redacted copy, embedded in run manifests

    const ProfileSpec* find_profile(const std::string& id) const;
};

AppConfig app_config_from_json(const nlohmann::json& j);
AppConfig load_app_config(const std::filesystem::path& path);

// All-mock configuration used when no --config is given: identity model,
// rule extractor, containment verifier, hashed-logprob reference scorer, the
// birthplace pipeline behavior, and an empty evidence fixture.
AppConfig default_offline_config();

// Recursively drops secret-shaped keys (api_key, secret, authorization, ...)
// so config snapshots are safe to embed in manifests.
nlohmann::json redact_secrets(const nlohmann::json& j);

// Instantiates every profile (mock via its behavior, http via the wire
// client) behind one gateway.
std::unique_ptr<Gateway> build_gateway(const AppConfig& config, const GatewayOptions& options);

} // namespace pic
