#include "pic/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <thread>

#include "pic/errors.hpp"
#include "pic/util.hpp"

namespace pic {

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

class Semaphore {
public:
    explicit Semaphore(int count) : avail_(count) {}
    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return avail_ > 0; });
        --avail_;
    }
    void release() {
        {
            std::lock_guard lock(mu_);
            ++avail_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int avail_;
};

} // namespace

std::string to_string(BackendKind k) {
    switch (k) {
        case BackendKind::openai_compatible_http: return "openai_compatible_http";
        case BackendKind::mock: return "mock";
    }
    throw std::logic_error("unknown BackendKind");
}

std::string to_string(Capability c) {
    switch (c) {
        case Capability::complete: return "complete";
        case Capability::score_logprobs: return "score_logprobs";
        case Capability::classify: return "classify";
    }
    throw std::logic_error("unknown Capability");
}

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "openai_compatible_http") return BackendKind::openai_compatible_http;
    if (s == "mock") return BackendKind::mock;
    throw ConfigError("unknown backend kind: " + s);
}

Capability capability_from_string(const std::string& s) {
    if (s == "complete") return Capability::complete;
    if (s == "score_logprobs") return Capability::score_logprobs;
    if (s == "classify") return Capability::classify;
    throw ConfigError("unknown capability: " + s);
}

void DecodeParams::validate() const {
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
    if (!(repetition_penalty > 0.0)) throw ConfigError("repetition_penalty must be > 0");
    if (max_tokens < 1) throw ConfigError("max_tokens must be a positive integer");
}

nlohmann::json DecodeParams::to_json() const {
    nlohmann::json j{{"temperature", temperature},
                     {"top_p", top_p},
                     {"repetition_penalty", repetition_penalty},
                     {"max_tokens", max_tokens}};
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    return j;
}

void BackendProfile::validate() const {
    if (id.empty()) throw ConfigError("backend profile id must be non-empty");
    if (max_concurrency < 1)
        throw ConfigError("profile " + id + ": max_concurrency must be >= 1");
    if (kind == BackendKind::openai_compatible_http && base_url.empty())
        throw ConfigError("profile " + id + ": http backend requires base_url");
    decode_defaults.validate();
}

std::string BackendProfile::resolved_credential_env() const {
    if (!credential_env_var.empty()) return credential_env_var;
    std::string env = "PIC_API_KEY_";
    for (char c : id) env.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return env;
}

// ---------- mock backend ----------

std::vector<std::string> mock_tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    size_t i = 0;
    auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    while (i < text.size()) {
        size_t b = i;
        while (i < text.size() && is_ws(text[i])) ++i;
        while (i < text.size() && !is_ws(text[i])) ++i;
        tokens.emplace_back(text.substr(b, i - b));
    }
    return tokens;
}

MockBackend::MockBackend(Handler handler) : handler_(std::move(handler)) {}

void MockBackend::set_logprob_constant(double value) {
    logprob_mode_ = LogprobMode::constant;
    logprob_constant_ = value;
}

void MockBackend::set_logprob_hashed(double offset) {
    logprob_mode_ = LogprobMode::hashed;
    logprob_offset_ = offset;
}

void MockBackend::set_logprob_script(std::map<std::string, std::vector<double>> script) {
    logprob_script_ = std::move(script);
}

void MockBackend::push_faults(const std::vector<MockFault>& faults) {
    std::lock_guard lock(fault_mu_);
    faults_.insert(faults_.end(), faults.begin(), faults.end());
}

void MockBackend::set_latency_ms(int ms) { latency_ms_ = ms; }

void MockBackend::maybe_fault() {
    std::optional<MockFault> f;
    {
        std::lock_guard lock(fault_mu_);
        if (!faults_.empty()) {
            f = faults_.front();
            faults_.erase(faults_.begin());
        }
    }
    if (!f) return;
    if (f->status == 0) throw RetryableError("mock transport failure", 0);
    if (f->status == 429) throw RetryableError("mock rate limited", 429);
    if (f->status >= 500) throw RetryableError("mock server error", f->status);
    throw PermanentError("mock client error", f->status);
}

void MockBackend::simulate_latency() {
    if (latency_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms_));
}

std::vector<double> MockBackend::logprobs_for(const std::vector<std::string>& tokens,
                                              const std::string& completion) const {
    auto it = logprob_script_.find(completion);
    if (it != logprob_script_.end()) return it->second;
    std::vector<double> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (logprob_mode_ == LogprobMode::constant) {
            out.push_back(logprob_constant_);
        } else {
            out.push_back(-1.0 - static_cast<double>(fnv1a64(t) % 1000) / 1000.0 +
                          logprob_offset_);
        }
    }
    return out;
}

BackendResult MockBackend::complete(const std::string& prompt, const DecodeParams& params) {
    maybe_fault();
    simulate_latency();
    calls_.fetch_add(1);
    BackendResult r;
    r.text = handler_ ? handler_(prompt, params) : std::string{};
    r.usage.prompt_tokens = count_words(prompt);
    r.usage.completion_tokens = mock_tokenize(r.text).size();
    return r;
}

BackendResult MockBackend::score(const std::string& prompt, const std::string& completion) {
    maybe_fault();
    simulate_latency();
    calls_.fetch_add(1);
    auto tokens = mock_tokenize(completion);
    auto lps = logprobs_for(tokens, completion);
    BackendResult r;
    std::vector<TokenLogprob> tl;
    size_t n = lps.size();
    for (size_t i = 0; i < n; ++i) {
        TokenLogprob t;
        t.token = i < tokens.size() ? tokens[i] : std::string{};
        t.logprob = lps[i];
        tl.push_back(std::move(t));
    }
    r.token_logprobs = std::move(tl);
    r.usage.prompt_tokens = count_words(prompt) + tokens.size();
    r.usage.completion_tokens = 0;
    return r;
}

MockEvidenceBackend::MockEvidenceBackend(std::map<std::string, std::vector<std::string>> fixture)
    : fixture_(std::move(fixture)) {}

std::shared_ptr<MockEvidenceBackend> MockEvidenceBackend::from_file(
    const std::filesystem::path& path) {
    auto j = nlohmann::json::parse(read_file(path));
    std::map<std::string, std::vector<std::string>> fixture;
    for (auto it = j.begin(); it != j.end(); ++it)
        fixture[it.key()] = it.value().get<std::vector<std::string>>();
    return std::make_shared<MockEvidenceBackend>(std::move(fixture));
}

std::vector<std::string> MockEvidenceBackend::fetch(const std::string& query, int top_k) {
    auto it = fixture_.find(query);
    if (it == fixture_.end()) return {};
    auto out = it->second;
    if (static_cast<int>(out.size()) > top_k) out.resize(static_cast<size_t>(top_k));
    return out;
}

// ---------- telemetry ----------

ProfileStats TelemetrySnapshot::totals() const {
    ProfileStats t;
    for (const auto& [id, s] : per_profile) {
        t.requests += s.requests;
        t.cache_hits += s.cache_hits;
        t.retries += s.retries;
        t.prompt_tokens += s.prompt_tokens;
        t.completion_tokens += s.completion_tokens;
        t.cost_usd += s.cost_usd;
        t.max_in_flight = std::max(t.max_in_flight, s.max_in_flight);
    }
    return t;
}

nlohmann::json TelemetrySnapshot::to_json() const {
    auto stats_json = [](const ProfileStats& s) {
        return nlohmann::json{{"requests", s.requests},
                              {"cache_hits", s.cache_hits},
                              {"retries", s.retries},
                              {"prompt_tokens", s.prompt_tokens},
                              {"completion_tokens", s.completion_tokens},
                              {"cost_usd", s.cost_usd},
                              {"max_in_flight", s.max_in_flight}};
    };
    nlohmann::json per;
    for (const auto& [id, s] : per_profile) per[id] = stats_json(s);
    return nlohmann::json{{"per_profile", per}, {"totals", stats_json(totals())}};
}

// ---------- gateway ----------

struct Gateway::Entry {
    BackendProfile profile;
    std::shared_ptr<Backend> backend;
    std::unique_ptr<Semaphore> sem;
    std::mutex stats_mu;
    ProfileStats stats;
    std::atomic<int> in_flight{0};
};

Gateway::~Gateway() = default;

Gateway::Gateway(GatewayOptions options)
    : options_(std::move(options)), jitter_state_(splitmix64(options_.jitter_seed ^ 0xA5A5A5A5ull)) {
    if (!options_.sleeper) {
        options_.sleeper = [](int ms) {
            std::this_thread::sleep_for(std::chrono::milliseconds(ms));
        };
    }
    if (options_.retry_budget < 0) throw ConfigError("retry_budget must be >= 0");
}

void Gateway::add_profile(const BackendProfile& profile, std::shared_ptr<Backend> backend) {
    profile.validate();
    if (!backend) throw ConfigError("profile " + profile.id + ": null backend");
    std::lock_guard lock(mu_);
    if (entries_.count(profile.id)) throw ConfigError("duplicate profile id: " + profile.id);
    auto e = std::make_unique<Entry>();
    e->profile = profile;
    e->backend = std::move(backend);
    int limit = profile.max_concurrency;
    if (options_.global_max_concurrency)
        limit = std::min(limit, std::max(1, *options_.global_max_concurrency));
    e->sem = std::make_unique<Semaphore>(limit);
    entries_.emplace(profile.id, std::move(e));
}

void Gateway::add_evidence(const EvidenceProfile& profile,
                           std::shared_ptr<EvidenceBackend> backend) {
    if (profile.id.empty()) throw ConfigError("evidence profile id must be non-empty");
    if (!backend) throw ConfigError("evidence profile " + profile.id + ": null backend");
    std::lock_guard lock(mu_);
    if (evidence_profiles_.count(profile.id))
        throw ConfigError("duplicate evidence profile id: " + profile.id);
    evidence_profiles_.emplace(profile.id, profile);
    evidence_backends_.emplace(profile.id, std::move(backend));
}

bool Gateway::has_profile(const std::string& id) const {
    std::lock_guard lock(mu_);
    return entries_.count(id) > 0;
}

Gateway::Entry& Gateway::entry(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw ConfigError("unknown backend profile: " + id);
    return *it->second;
}

const Gateway::Entry& Gateway::entry(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw ConfigError("unknown backend profile: " + id);
    return *it->second;
}

const BackendProfile& Gateway::profile(const std::string& id) const {
    return entry(id).profile;
}

std::optional<GatewayResponse> Gateway::cache_lookup(const std::string& profile_id,
                                                     const std::string& key) const {
    if (!options_.cache_dir) return std::nullopt;
    auto path = *options_.cache_dir / profile_id / (key + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
        auto j = nlohmann::json::parse(read_file(path));
        GatewayResponse resp;
        resp.text = j.at("text").get<std::string>();
        if (j.contains("token_logprobs") && !j.at("token_logprobs").is_null()) {
            std::vector<TokenLogprob> tl;
            for (const auto& e : j.at("token_logprobs"))
                tl.push_back({e.at("token").get<std::string>(), e.at("logprob").get<double>()});
            resp.token_logprobs = std::move(tl);
        }
        resp.usage.prompt_tokens = j.at("usage").at("prompt_tokens").get<uint64_t>();
        resp.usage.completion_tokens = j.at("usage").at("completion_tokens").get<uint64_t>();
        resp.cache_hit = true;
        return resp;
    } catch (...) {
        return std::nullopt; // corrupt cache entry: treat as a miss
    }
}

void Gateway::cache_store(const std::string& profile_id, const std::string& key,
                          const GatewayResponse& resp) const {
    if (!options_.cache_dir) return;
    nlohmann::json j;
    j["text"] = resp.text;
    if (resp.token_logprobs) {
        auto arr = nlohmann::json::array();
        for (const auto& t : *resp.token_logprobs)
            arr.push_back({{"token", t.token}, {"logprob", t.logprob}});
        j["token_logprobs"] = std::move(arr);
    } else {
        j["token_logprobs"] = nullptr;
    }
    j["usage"] = {{"prompt_tokens", resp.usage.prompt_tokens},
                  {"completion_tokens", resp.usage.completion_tokens}};
    auto path = *options_.cache_dir / profile_id / (key + ".json");
    atomic_write_file(path, j.dump());
}

BackendResult Gateway::call_with_retry(Entry& e, const std::function<BackendResult()>& fn) {
    int last_delay = 0;
    for (int attempt = 0;; ++attempt) {
        try {
            return fn();
        } catch (const RetryableError& err) {
            if (attempt >= options_.retry_budget) throw;
            double base = static_cast<double>(options_.backoff_base_ms) *
                          std::pow(2.0, static_cast<double>(attempt));
            base = std::min(base, static_cast<double>(options_.backoff_max_ms));
            double factor;
            {
                std::lock_guard lock(jitter_mu_);
                jitter_state_ = splitmix64(jitter_state_);
                factor = 0.5 + 0.5 * (static_cast<double>(jitter_state_ >> 11) * 0x1.0p-53);
            }
            int delay = static_cast<int>(base * factor);
            delay = std::max(delay, err.retry_after_ms());
            delay = std::max(delay, last_delay); // keep the sequence nondecreasing
            last_delay = delay;
            {
                std::lock_guard lock(backoff_log_mu_);
                backoff_log_.push_back(delay);
            }
            {
                std::lock_guard lock(e.stats_mu);
                ++e.stats.retries;
            }
            options_.sleeper(delay);
        }
    }
}

GatewayResponse Gateway::request(Entry& e, const std::string& op, const std::string& prompt,
                                 const std::string& completion, const DecodeParams& params,
                                 const CallOptions& copts) {
    double t0 = now_ms();
    nlohmann::json key_material{{"op", op},
                                {"profile", e.profile.id},
                                {"model", e.profile.model_name},
                                {"prompt", prompt},
                                {"params", params.to_json()}};
    if (op == "score") key_material["completion"] = completion;
    std::string key = sha256_hex(key_material.dump());

    {
        std::lock_guard lock(e.stats_mu);
        ++e.stats.requests;
    }

    if (!copts.bypass_cache) {
        if (auto cached = cache_lookup(e.profile.id, key)) {
            cached->latency_ms = now_ms() - t0;
            std::lock_guard lock(e.stats_mu);
            ++e.stats.cache_hits;
            return *cached;
        }
    }

    e.sem->acquire();
    int cur = e.in_flight.fetch_add(1) + 1;
    {
        std::lock_guard lock(e.stats_mu);
        e.stats.max_in_flight = std::max(e.stats.max_in_flight, cur);
    }
    BackendResult result;
    try {
        result = call_with_retry(e, [&]() -> BackendResult {
            if (op == "complete") return e.backend->complete(prompt, params);
            return e.backend->score(prompt, completion);
        });
    } catch (...) {
        e.in_flight.fetch_sub(1);
        e.sem->release();
        throw;
    }
    e.in_flight.fetch_sub(1);
    e.sem->release();

    GatewayResponse resp;
    resp.text = result.text;
    resp.token_logprobs = result.token_logprobs;
    resp.usage = result.usage;
    resp.cache_hit = false;
    resp.latency_ms = now_ms() - t0;

    {
        std::lock_guard lock(e.stats_mu);
        e.stats.prompt_tokens += resp.usage.prompt_tokens;
        e.stats.completion_tokens += resp.usage.completion_tokens;
        e.stats.cost_usd +=
            static_cast<double>(resp.usage.prompt_tokens) / 1e6 * e.profile.pricing.prompt_usd_per_mtok +
            static_cast<double>(resp.usage.completion_tokens) / 1e6 *
                e.profile.pricing.completion_usd_per_mtok;
    }

    cache_store(e.profile.id, key, resp);
    return resp;
}

GatewayResponse Gateway::complete(const std::string& profile_id, const std::string& prompt,
                                  std::optional<DecodeParams> params, const CallOptions& copts) {
    Entry& e = entry(profile_id);
    if (!e.profile.capabilities.count(Capability::complete))
        throw ConfigError("profile " + profile_id + " lacks the complete capability");
    DecodeParams p = params ? *params : e.profile.decode_defaults;
    p.validate();
    auto resp = request(e, "complete", prompt, "", p, copts);
    resp.token_logprobs.reset(); // completion calls never carry logprobs
    return resp;
}

std::vector<TokenLogprob> Gateway::score_logprobs(const std::string& profile_id,
                                                  const std::string& prompt,
                                                  const std::string& completion,
                                                  const CallOptions& copts) {
    Entry& e = entry(profile_id);
    if (!e.profile.capabilities.count(Capability::score_logprobs))
        throw ConfigError("profile " + profile_id + " lacks the score_logprobs capability");
    if (completion.empty()) return {};
    auto resp = request(e, "score", prompt, completion, e.profile.decode_defaults, copts);
    if (!resp.token_logprobs)
        throw ProtocolError("profile " + profile_id + ": scoring call returned no logprobs");
    std::string joined;
    for (const auto& t : *resp.token_logprobs) joined += t.token;
    if (joined != completion)
        throw ProtocolError("profile " + profile_id +
                            ": scored tokens do not reconstruct the completion (token count or "
                            "text mismatch)");
    return *resp.token_logprobs;
}

std::vector<std::string> Gateway::fetch_evidence(const std::string& provider_id,
                                                 const std::string& query, int top_k) {
    if (top_k < 1) throw PreconditionError("fetch_evidence: top_k must be >= 1");
    std::shared_ptr<EvidenceBackend> backend;
    {
        std::lock_guard lock(mu_);
        auto it = evidence_backends_.find(provider_id);
        if (it == evidence_backends_.end())
            throw ConfigError("unknown evidence provider: " + provider_id);
        backend = it->second;
    }

    nlohmann::json key_material{
        {"op", "evidence"}, {"profile", provider_id}, {"q", query}, {"top_k", top_k}};
    std::string key = sha256_hex(key_material.dump());
    if (options_.cache_dir) {
        auto path = *options_.cache_dir / provider_id / (key + ".json");
        std::error_code ec;
        if (std::filesystem::exists(path, ec)) {
            try {
                auto j = nlohmann::json::parse(read_file(path));
                return j.at("snippets").get<std::vector<std::string>>();
            } catch (...) {
                // fall through to a live fetch
            }
        }
    }

    std::vector<std::string> snippets;
    int last_delay = 0;
    for (int attempt = 0;; ++attempt) {
        try {
            snippets = backend->fetch(query, top_k);
            break;
        } catch (const RetryableError& err) {
            if (attempt >= options_.retry_budget) throw;
            double base = static_cast<double>(options_.backoff_base_ms) *
                          std::pow(2.0, static_cast<double>(attempt));
            base = std::min(base, static_cast<double>(options_.backoff_max_ms));
            double factor;
            {
                std::lock_guard lock(jitter_mu_);
                jitter_state_ = splitmix64(jitter_state_);
                factor = 0.5 + 0.5 * (static_cast<double>(jitter_state_ >> 11) * 0x1.0p-53);
            }
            int delay = std::max({static_cast<int>(base * factor), err.retry_after_ms(), last_delay});
            last_delay = delay;
            options_.sleeper(delay);
        }
    }

    if (options_.cache_dir) {
        auto path = *options_.cache_dir / provider_id / (key + ".json");
        atomic_write_file(path, nlohmann::json{{"snippets", snippets}}.dump());
    }
    return snippets;
}

TelemetrySnapshot Gateway::telemetry() const {
    TelemetrySnapshot snap;
    std::lock_guard lock(mu_);
    for (const auto& [id, e] : entries_) {
        std::lock_guard slock(e->stats_mu);
        snap.per_profile[id] = e->stats;
    }
    return snap;
}

std::vector<int> Gateway::backoff_log() const {
    std::lock_guard lock(backoff_log_mu_);
    return backoff_log_;
}

} // namespace pic
