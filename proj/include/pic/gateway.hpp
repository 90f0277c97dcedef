#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pic {

enum class BackendKind { openai_compatible_http, mock };
enum class Capability { complete, score_logprobs, classify };

std::string to_string(BackendKind k);
std::string to_string(Capability c);
BackendKind backend_kind_from_string(const std::string& s);
Capability capability_from_string(const std::string& s);

struct DecodeParams {
    double temperature = 0.0;
    double top_p = 1.0;
    double repetition_penalty = 1.2;
    int max_tokens = 1024;
    std::optional<uint64_t> seed;

    void validate() const; // throws ConfigError on out-of-range values
    nlohmann::json to_json() const;
};

struct ModelPricing {
    double prompt_usd_per_mtok = 0.0;
    double completion_usd_per_mtok = 0.0;
};

struct BackendProfile {
    std::string id;
    BackendKind kind = BackendKind::mock;
    std::string base_url;                      // http backends only
    std::string model_name;
    std::set<Capability> capabilities = {Capability::complete};
    DecodeParams decode_defaults;
    int max_concurrency = 4;
    std::string credential_env_var;            // default PIC_API_KEY_{ID}
    ModelPricing pricing;

    void validate() const;
    std::string resolved_credential_env() const;
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
};

struct Usage {
    uint64_t prompt_tokens = 0;
    uint64_t completion_tokens = 0;
};

struct GatewayResponse {
    std::string text;
    std::optional<std::vector<TokenLogprob>> token_logprobs; // scoring calls only
    Usage usage;
    bool cache_hit = false;
    double latency_ms = 0.0;
};

// Raw transport-facing result; the gateway adds caching/telemetry on top.
struct BackendResult {
    std::string text;
    std::optional<std::vector<TokenLogprob>> token_logprobs;
    Usage usage;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendResult complete(const std::string& prompt, const DecodeParams& params) = 0;
    virtual BackendResult score(const std::string& prompt, const std::string& completion) = 0;
};

class EvidenceBackend {
public:
    virtual ~EvidenceBackend() = default;
    virtual std::vector<std::string> fetch(const std::string& query, int top_k) = 0;
};

enum class EvidenceKind { serper_http, mock };

struct EvidenceProfile {
    std::string id;
    EvidenceKind kind = EvidenceKind::mock;
    std::string base_url;          // serper_http
    std::string credential_env_var;
    std::string fixture_path;      // mock: JSON object {query: [snippet, ...]}
};

// ---------- mock backend ----------

// Splits text into tokens that concatenate back to the exact input: each
// token is one whitespace run glued to the following word (the first token
// may lack the whitespace prefix). "a b" -> ["a", " b"].
std::vector<std::string> mock_tokenize(const std::string& text);

struct MockFault {
    int status = 429; // 429/5xx retryable, other 4xx permanent, 0 = transport
};

class MockBackend : public Backend {
public:
    using Handler = std::function<std::string(const std::string& prompt, const DecodeParams&)>;
    enum class LogprobMode { constant, hashed };

    explicit MockBackend(Handler handler);

    void set_logprob_constant(double value);
    void set_logprob_hashed(double offset = 0.0);
    // Scripted per-completion logprob vectors, keyed by exact completion text.
    void set_logprob_script(std::map<std::string, std::vector<double>> script);
    void push_faults(const std::vector<MockFault>& faults);
    void set_latency_ms(int ms);

    BackendResult complete(const std::string& prompt, const DecodeParams& params) override;
    BackendResult score(const std::string& prompt, const std::string& completion) override;

    uint64_t calls() const { return calls_.load(); }

private:
    void maybe_fault();
    void simulate_latency();
    std::vector<double> logprobs_for(const std::vector<std::string>& tokens,
                                     const std::string& completion) const;

    Handler handler_;
    LogprobMode logprob_mode_ = LogprobMode::constant;
    double logprob_constant_ = -1.0;
    double logprob_offset_ = 0.0;
    std::map<std::string, std::vector<double>> logprob_script_;
    std::mutex fault_mu_;
    std::vector<MockFault> faults_;
    int latency_ms_ = 0;
    std::atomic<uint64_t> calls_{0};
};

class MockEvidenceBackend : public EvidenceBackend {
public:
    explicit MockEvidenceBackend(std::map<std::string, std::vector<std::string>> fixture);
    static std::shared_ptr<MockEvidenceBackend> from_file(const std::filesystem::path& path);
    std::vector<std::string> fetch(const std::string& query, int top_k) override;

private:
    std::map<std::string, std::vector<std::string>> fixture_;
};

// ---------- http backends (see gateway_http.cpp) ----------

std::shared_ptr<Backend> make_http_backend(const BackendProfile& profile);
std::shared_ptr<EvidenceBackend> make_serper_backend(const EvidenceProfile& profile);

// ---------- telemetry ----------

struct ProfileStats {
    uint64_t requests = 0;
    uint64_t cache_hits = 0;
    uint64_t retries = 0;
    uint64_t prompt_tokens = 0;
    uint64_t completion_tokens = 0;
    double cost_usd = 0.0;
    int max_in_flight = 0;
};

struct TelemetrySnapshot {
    std::map<std::string, ProfileStats> per_profile;
    ProfileStats totals() const;
    nlohmann::json to_json() const;
};

// ---------- gateway ----------

struct GatewayOptions {
    std::optional<std::filesystem::path> cache_dir; // nullopt = caching off
    int retry_budget = 5;
    int backoff_base_ms = 200;
    int backoff_max_ms = 8000;
    uint64_t jitter_seed = 0;
    std::optional<int> global_max_concurrency;
    // Injectable for tests; defaults to an actual sleep.
    std::function<void(int ms)> sleeper;
};

struct CallOptions {
    bool bypass_cache = false;
};

class Gateway {
public:
    explicit Gateway(GatewayOptions options = {});
    ~Gateway(); // out of line: Entry is incomplete here

    void add_profile(const BackendProfile& profile, std::shared_ptr<Backend> backend);
    void add_evidence(const EvidenceProfile& profile, std::shared_ptr<EvidenceBackend> backend);
    bool has_profile(const std::string& id) const;
    const BackendProfile& profile(const std::string& id) const;

    GatewayResponse complete(const std::string& profile_id, const std::string& prompt,
                             std::optional<DecodeParams> params = std::nullopt,
                             const CallOptions& copts = {});
    std::vector<TokenLogprob> score_logprobs(const std::string& profile_id,
                                             const std::string& prompt,
                                             const std::string& completion,
                                             const CallOptions& copts = {});
    std::vector<std::string> fetch_evidence(const std::string& provider_id,
                                            const std::string& query, int top_k = 10);

    TelemetrySnapshot telemetry() const;
    const GatewayOptions& options() const { return options_; }

    // Observed delays, in order, for backoff-shape assertions in tests.
    std::vector<int> backoff_log() const;

private:
    struct Entry;
    Entry& entry(const std::string& id);
    const Entry& entry(const std::string& id) const;

    GatewayResponse request(Entry& e, const std::string& op, const std::string& prompt,
                            const std::string& completion, const DecodeParams& params,
                            const CallOptions& copts);
    BackendResult call_with_retry(Entry& e, const std::function<BackendResult()>& fn);
    std::optional<GatewayResponse> cache_lookup(const std::string& profile_id,
                                                const std::string& key) const;
    void cache_store(const std::string& profile_id, const std::string& key,
                     const GatewayResponse& resp) const;

    GatewayOptions options_;
    mutable std::mutex mu_;
    std::map<std::string, std::unique_ptr<Entry>> entries_;
    std::map<std::string, EvidenceProfile> evidence_profiles_;
    std::map<std::string, std::shared_ptr<EvidenceBackend>> evidence_backends_;
    mutable std::mutex jitter_mu_;
    uint64_t jitter_state_;
    mutable std::mutex backoff_log_mu_;
    std::vector<int> backoff_log_;
};

} // namespace pic
