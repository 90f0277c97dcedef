#include "pic/cli.hpp"

#include <chrono>
#include <iostream>
#include <mutex>
#include <optional>

#include <CLI11.hpp>

#include "pic/claims.hpp"
#include "pic/config.hpp"
#include "pic/errors.hpp"
#include "pic/extraction.hpp"
#include "pic/gateway.hpp"
#include "pic/manifest.hpp"
#include "pic/metrics.hpp"
#include "pic/pipeline.hpp"
#include "pic/prefdata.hpp"
#include "pic/qa_metrics.hpp"
#include "pic/report.hpp"
#include "pic/util.hpp"
#include "pic/verification.hpp"

namespace pic::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct GlobalArgs {
    std::string config_path;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string cache_dir;
    bool cache_dir_set = false;
    int max_concurrency = 0;
    std::string out_dir = "pic-out";
};

struct Ctx {
    AppConfig config;
    std::unique_ptr<Gateway> gateway;
    uint64_t seed = 0;
    size_t workers = 8;
    fs::path out_dir;
    RunManifest manifest;
    Clock::time_point started;
    std::vector<nlohmann::json> errors; // {"id","stage","error"} per failed sample
};

Ctx make_ctx(const GlobalArgs& g, const std::string& command) {
    Ctx ctx;
    ctx.config = g.config_path.empty() ? default_offline_config()
                                       : load_app_config(g.config_path);
    ctx.seed = g.seed_set ? g.seed : ctx.config.defaults.seed;

    GatewayOptions opts;
    if (g.cache_dir_set) {
        if (!g.cache_dir.empty()) opts.cache_dir = g.cache_dir;
    } else if (ctx.config.defaults.cache_dir) {
        opts.cache_dir = *ctx.config.defaults.cache_dir;
    }
    if (g.max_concurrency > 0)
        opts.global_max_concurrency = g.max_concurrency;
    else if (ctx.config.defaults.max_concurrency)
        opts.global_max_concurrency = *ctx.config.defaults.max_concurrency;
    opts.jitter_seed = ctx.seed;
    ctx.gateway = build_gateway(ctx.config, opts);

    ctx.workers = opts.global_max_concurrency ? static_cast<size_t>(*opts.global_max_concurrency)
                                              : 8;
    if (ctx.workers == 0) ctx.workers = 1;

    ctx.out_dir = g.out_dir;
    fs::create_directories(ctx.out_dir);
    ctx.manifest.command = command;
    ctx.manifest.config_snapshot = ctx.config.source;
    ctx.manifest.seed = ctx.seed;
    ctx.started = Clock::now();
    return ctx;
}

void fail_sample(Ctx& ctx, const std::string& id, const std::string& stage,
                 const std::string& error) {
    ctx.errors.push_back({{"id", id}, {"stage", stage}, {"error", error}});
}

// Rows with null placeholders (failed samples) are skipped.
void write_rows(Ctx& ctx, const std::string& name, const std::vector<nlohmann::json>& rows) {
    std::vector<nlohmann::json> kept;
    kept.reserve(rows.size());
    for (const auto& r : rows)
        if (!r.is_null()) kept.push_back(r);
    fs::path path = ctx.out_dir / name;
    write_jsonl(path, kept);
    ctx.manifest.add_output(path);
}

void write_text(Ctx& ctx, const std::string& name, const std::string& content) {
    fs::path path = ctx.out_dir / name;
    atomic_write_file(path, content);
    ctx.manifest.add_output(path);
}

int finish(Ctx& ctx) {
    if (!ctx.errors.empty())
        write_text(ctx, "errors.json", nlohmann::json{{"errors", ctx.errors}}.dump(2) + "\n");
    ctx.manifest.wall_clock_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - ctx.started).count();
    ctx.manifest.telemetry = ctx.gateway->telemetry().to_json();
    write_manifest(ctx.out_dir / "manifest.json", ctx.manifest);
    if (!ctx.errors.empty())
        std::cerr << ctx.errors.size() << " sample(s) failed; see errors.json\n";
    return ctx.errors.empty() ? 0 : 1;
}

std::vector<nlohmann::json> load_rows(Ctx& ctx, const fs::path& path) {
    auto rows = read_jsonl(path);
    ctx.manifest.add_input(path);
    return rows;
}

// Parses every row before any gateway work so a malformed record fails the
// run immediately, with its record number.
template <typename T, typename Fn>
std::vector<T> parse_rows(const std::vector<nlohmann::json>& rows, Fn&& fn) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        try {
            out.push_back(fn(rows[i], i));
        } catch (const InputError& e) {
            throw InputError("record " + std::to_string(i + 1) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw InputError("record " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

// Per-sample worker wrapper: configuration mistakes abort the run, anything
// else marks just that sample as failed.
template <typename Fn>
void for_each_sample(Ctx& ctx, size_t n, std::vector<std::optional<std::string>>& failures,
                     Fn&& fn) {
    failures.assign(n, std::nullopt);
    parallel_for_indexed(n, ctx.workers, [&](size_t i) {
        try {
            fn(i);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });
}

void emit_report_files(Ctx& ctx, const nlohmann::json& report) {
    write_text(ctx, "report.json", report.dump(2) + "\n");
    write_text(ctx, "report.md", report_markdown(report));
    write_text(ctx, "report.csv", report_csv(report));
}

// ---------- eval ----------

struct EvalArgs {
    std::string tasks;
    std::string model, extractor, verifier;
    size_t replicates = 1000;
};

int cmd_eval(const GlobalArgs& g, const EvalArgs& a, const std::string& command) {
    Ctx ctx = make_ctx(g, command);
    auto tasks = load_tasks(a.tasks);
    ctx.manifest.add_input(a.tasks);
    if (tasks.empty()) throw InputError("no tasks in " + a.tasks);

    std::string model = a.model.empty() ? ctx.config.defaults.model : a.model;
    EvalProfiles profiles{a.extractor.empty() ? ctx.config.defaults.extractor : a.extractor,
                          a.verifier.empty() ? ctx.config.defaults.verifier : a.verifier};

    std::vector<nlohmann::json> responses(tasks.size()), scores(tasks.size());
    std::vector<std::optional<ScoreRow>> rows(tasks.size());
    std::vector<std::optional<std::string>> failures;
    for_each_sample(ctx, tasks.size(), failures, [&](size_t i) {
        const auto& task = tasks[i];
        std::string response = ctx.gateway->complete(model, render_prompt(task)).text;
        auto eval = evaluate_response(*ctx.gateway, profiles, task, response);
        responses[i] = {{"task_id", task.id}, {"response", response}};
        auto row = score_to_json(task.id, task.mode, eval.score);
        if (!eval.warnings.empty()) row["warnings"] = eval.warnings;
        scores[i] = std::move(row);
        rows[i] = ScoreRow{task.id, task.mode, eval.score};
    });
    for (size_t i = 0; i < tasks.size(); ++i)
        if (failures[i]) fail_sample(ctx, tasks[i].id, "eval", *failures[i]);

    write_rows(ctx, "responses.jsonl", responses);
    write_rows(ctx, "scores.jsonl", scores);
    std::vector<ScoreRow> scored;
    for (auto& r : rows)
        if (r) scored.push_back(std::move(*r));
    if (!scored.empty())
        emit_report_files(ctx, eval_report_json(scored, a.replicates, ctx.seed));
    return finish(ctx);
}

// ---------- convert ----------

struct ConvertArgs {
    std::string raw;
    std::string extractor, verifier;
};

int cmd_convert(const GlobalArgs& g, const ConvertArgs& a, const std::string& command) {
    Ctx ctx = make_ctx(g, command);
    auto rows = load_rows(ctx, a.raw);
    if (rows.empty()) throw InputError("no samples in " + a.raw);
    auto samples = parse_rows<RawSample>(rows, [](const nlohmann::json& j, size_t i) {
        return raw_from_json(j, i);
    });

    EvalProfiles profiles{a.extractor.empty() ? ctx.config.defaults.extractor : a.extractor,
                          a.verifier.empty() ? ctx.config.defaults.verifier : a.verifier};

    std::vector<nlohmann::json> retained(samples.size()), drops(samples.size());
    std::vector<std::optional<std::string>> failures;
    for_each_sample(ctx, samples.size(), failures, [&](size_t i) {
        auto outcome = convert_and_filter(*ctx.gateway, profiles, samples[i]);
        if (outcome.sample) {
            retained[i] = sft_to_json(*outcome.sample);
        } else {
            drops[i] = {{"id", samples[i].id},
                        {"reason", to_string(outcome.reason)},
                        {"score", outcome.score}};
        }
    });
    for (size_t i = 0; i < samples.size(); ++i)
        if (failures[i]) fail_sample(ctx, samples[i].id, "convert", *failures[i]);

    write_rows(ctx, "sft.jsonl", retained);
    write_rows(ctx, "drops.jsonl", drops);
    return finish(ctx);
}

// ---------- extract ----------

struct ExtractArgs {
    std::string input;
    std::string extractor;
};

struct ExtractRow {
    std::string id;
    std::string text;
};

int cmd_extract(const GlobalArgs& g, const ExtractArgs& a, const std::string& command) {
    Ctx ctx = make_ctx(g, command);
    auto rows = load_rows(ctx, a.input);
    if (rows.empty()) throw InputError("no records in " + a.input);
    auto inputs = parse_rows<ExtractRow>(rows, [](const nlohmann::json& j, size_t i) {
        ExtractRow r;
        r.id = j.contains("id") ? j.at("id").get<std::string>() : "t" + std::to_string(i + 1);
        if (!j.contains("text") || !j.at("text").is_string())
            throw InputError("record " + r.id + " missing string \"text\"");
        r.text = j.at("text").get<std::string>();
        return r;
    });

    std::string extractor = a.extractor.empty() ? ctx.config.defaults.extractor : a.extractor;
    std::vector<nlohmann::json> out(inputs.size());
    std::vector<std::optional<std::string>> failures;
    // Window-level parallelism lives inside extract_claims; rows go one at a
    // time so thread counts stay bounded.
    for_each_sample(ctx, inputs.size(), failures, [&](size_t i) {
        auto result = extract_claims(*ctx.gateway, extractor, inputs[i].text);
        nlohmann::json claims = nlohmann::json::array();
        for (const auto& c : result.claims.claims) claims.push_back(claim_to_json(c));
        out[i] = {{"id", inputs[i].id}, {"claims", std::move(claims)}};
        if (!result.warnings.empty()) out[i]["warnings"] = result.warnings;
    });
    for (size_t i = 0; i < inputs.size(); ++i)
        if (failures[i]) fail_sample(ctx, inputs[i].id, "extract", *failures[i]);

    write_rows(ctx, "claims.jsonl", out);
    return finish(ctx);
}

// ---------- verify ----------

struct VerifyArgs {
    std::string input;
    std::string verifier;
};

struct VerifyRow {
    std::string id;
    ClaimSet claims;
    ClaimSet against;
};

int cmd_verify(const GlobalArgs& g, const VerifyArgs& a, const std::string& command) {
    Ctx ctx = make_ctx(g, command);
    auto rows = load_rows(ctx, a.input);
    if (rows.empty()) throw InputError("no records in " + a.input);
    auto inputs = parse_rows<VerifyRow>(rows, [](const nlohmann::json& j, size_t i) {
        VerifyRow r;
        r.id = j.contains("id") ? j.at("id").get<std::string>() : "v" + std::to_string(i + 1);
        if (!j.contains("claims") || !j.contains("against"))
            throw InputError("record " + r.id + " needs \"claims\" and \"against\"");
        size_t ci = 0;
        for (const auto& cj : j.at("claims")) r.claims.claims.push_back(claim_from_json(cj, ci++));
        size_t ai = 0;
        for (const auto& cj : j.at("against"))
            r.against.claims.push_back(claim_from_json(cj, ai++));
        return r;
    });

    std::string verifier = a.verifier.empty() ? ctx.config.defaults.verifier : a.verifier;
    std::vector<nlohmann::json> out(inputs.size());
    std::vector<std::optional<std::string>> failures;
    for_each_sample(ctx, inputs.size(), failures, [&](size_t i) {
        auto batch = verify_batch(*ctx.gateway, verifier, inputs[i].claims, inputs[i].against);
        nlohmann::json verdicts = nlohmann::json::array();
        for (const auto& v : batch.verdicts) {
            verdicts.push_back({{"claim_id", v.claim_id},
                                {"label", to_string(v.label)},
                                {"evidence_ids", v.evidence_ids},
                                {"parse_failed", v.parse_failed},
                                {"call_failed", v.call_failed}});
        }
        out[i] = {{"id", inputs[i].id},
                  {"supported", batch.supported},
                  {"unsupported", batch.unsupported},
                  {"verdicts", std::move(verdicts)}};
    });
    for (size_t i = 0; i < inputs.size(); ++i)
        if (failures[i]) fail_sample(ctx, inputs[i].id, "verify", *failures[i]);

    write_rows(ctx, "verdicts.jsonl", out);
    return finish(ctx);
}

// ---------- prefdata ----------

struct PrefArgs {
    std::string sft;
    std::string sft_profile, ref_profile;
    double tau = -1.0; // <0: per-mode default
    double p_min = 0.1;
    double p_max = 0.5;
    int last_l = 20;
};

int cmd_prefdata(const GlobalArgs& g, const PrefArgs& a, const std::string& command) {
    Ctx ctx = make_ctx(g, command);
    auto rows = load_rows(ctx, a.sft);
    if (rows.empty()) throw InputError("no samples in " + a.sft);
    auto samples = parse_rows<SftSample>(rows, [](const nlohmann::json& j, size_t i) {
        return sft_from_json(j, i);
    });

    PrefProfiles profiles{a.sft_profile.empty() ? ctx.config.defaults.sft : a.sft_profile,
                          a.ref_profile.empty() ? ctx.config.defaults.ref : a.ref_profile};

    std::vector<nlohmann::json> tuples(samples.size()), skips(samples.size());
    std::vector<std::optional<std::string>> failures;
    for_each_sample(ctx, samples.size(), failures, [&](size_t i) {
        PerturbParams params;
        params.p_min = a.p_min;
        params.p_max = a.p_max;
        params.last_l = a.last_l;
        params.seed = ctx.seed;
        params.tau = a.tau >= 0.0 ? a.tau
                                  : (samples[i].mode == TaskMode::full ? kTauDefaultFull
                                                                       : kTauDefaultPartial);
        params.validate();
        auto outcome = build_preference(*ctx.gateway, profiles, samples[i], params);
        if (outcome.tuple)
            tuples[i] = pref_to_json(*outcome.tuple);
        else
            skips[i] = {{"id", samples[i].id}, {"reason", to_string(outcome.skip)}};
    });
    for (size_t i = 0; i < samples.size(); ++i)
        if (failures[i]) fail_sample(ctx, samples[i].id, "prefdata", *failures[i]);

    write_rows(ctx, "prefs.jsonl", tuples);
    write_rows(ctx, "skips.jsonl", skips);
    return finish(ctx);
}

// ---------- pipeline ----------

struct PipelineArgs {
    std::string input;
    bool birthplace_tasks = false;
    std::string draft, verify, final_profile;
    int k_samples = 5;
    int vote_threshold = 3;
    double verify_temperature = 0.7;
    std::string style;
    bool check_evidence = false;
    std::string evidence, evidence_extractor, evidence_judge;
};

PipelineInput pipeline_input_from_json(const nlohmann::json& j, size_t i) {
    PipelineInput in;
    in.id = j.contains("id") ? j.at("id").get<std::string>() : "p" + std::to_string(i + 1);
    if (j.contains("birthplace")) {
        const auto& b = j.at("birthplace");
        BirthplaceSpec spec;
        spec.occupation = b.at("occupation").get<std::string>();
        spec.location = b.at("location").get<std::string>();
        in.birthplace = spec;
    }
    if (j.contains("instruction"))
        in.instruction = j.at("instruction").get<std::string>();
    else if (in.birthplace)
        in.instruction = birthplace_instruction(*in.birthplace);
    else
        throw InputError("pipeline input " + in.id + " missing \"instruction\"");
    return in;
}

int cmd_pipeline(const GlobalArgs& g, const PipelineArgs& a, const std::string& command) {
    Ctx ctx = make_ctx(g, command);

    std::vector<PipelineInput> inputs;
    if (a.birthplace_tasks) {
        auto specs = birthplace_task_list();
        for (size_t i = 0; i < specs.size(); ++i) {
            PipelineInput in;
            in.id = "bp" + std::to_string(i + 1);
            in.instruction = birthplace_instruction(specs[i]);
            in.birthplace = specs[i];
            inputs.push_back(std::move(in));
        }
    } else {
        if (a.input.empty())
            throw ConfigError("pipeline needs an input file or --birthplace-tasks");
        auto rows = load_rows(ctx, a.input);
        if (rows.empty()) throw InputError("no records in " + a.input);
        inputs = parse_rows<PipelineInput>(rows, pipeline_input_from_json);
    }

    PipelineConfig cfg;
    cfg.draft_profile = a.draft.empty() ? ctx.config.defaults.draft : a.draft;
    cfg.verify_profile = a.verify.empty() ? ctx.config.defaults.pipeline_verifier : a.verify;
    cfg.final_profile = a.final_profile.empty() ? ctx.config.defaults.final_profile
                                                : a.final_profile;
    cfg.k_samples = a.k_samples;
    cfg.vote_threshold = a.vote_threshold;
    cfg.verify_temperature = a.verify_temperature;
    if (!a.style.empty()) cfg.style_suffix = a.style;
    cfg.seed = ctx.seed;
    cfg.validate();

    std::string evidence = a.evidence.empty() ? ctx.config.defaults.evidence : a.evidence;
    std::string ev_extractor =
        a.evidence_extractor.empty() ? ctx.config.defaults.extractor : a.evidence_extractor;
    std::string ev_judge =
        a.evidence_judge.empty() ? ctx.config.defaults.verifier : a.evidence_judge;

    std::vector<nlohmann::json> traces(inputs.size());
    std::vector<std::optional<double>> ev_precisions(inputs.size());
    std::vector<std::optional<std::string>> failures;
    size_t excluded = 0;
    std::mutex mu;
    for_each_sample(ctx, inputs.size(), failures, [&](size_t i) {
        auto trace = run_pipeline(*ctx.gateway, cfg, inputs[i]);
        auto row = trace_to_json(trace);
        if (a.check_evidence && trace.final_response) {
            auto ep = evidence_factual_precision(*ctx.gateway, ev_extractor, ev_judge, evidence,
                                                 *trace.final_response);
            row["evidence_precision"] =
                ep.precision ? nlohmann::json(*ep.precision) : nlohmann::json(nullptr);
            row["evidence_correct"] = ep.correct;
            row["evidence_total"] = ep.total;
            ev_precisions[i] = ep.precision;
        }
        traces[i] = std::move(row);
        if (trace.excluded) {
            std::lock_guard<std::mutex> lock(mu);
            ++excluded;
        }
    });
    for (size_t i = 0; i < inputs.size(); ++i)
        if (failures[i]) fail_sample(ctx, inputs[i].id, "pipeline", *failures[i]);

    write_rows(ctx, "traces.jsonl", traces);
    nlohmann::json summary{{"n", inputs.size()},
                           {"failed", ctx.errors.size()},
                           {"excluded", excluded}};
    if (a.check_evidence) {
        std::vector<double> defined;
        for (const auto& p : ev_precisions)
            if (p) defined.push_back(*p);
        if (!defined.empty())
            summary["evidence_precision"] =
                metric_summary_json("evidence_precision", defined, 1000, ctx.seed);
    }
    write_text(ctx, "summary.json", summary.dump(2) + "\n");
    return finish(ctx);
}

// ---------- ragqa ----------

struct RagArgs {
    std::string input;
    std::string model;
    std::string metric = "em"; // em | qampari
    int k = 5;
};

int cmd_ragqa(const GlobalArgs& g, const RagArgs& a, const std::string& command) {
    Ctx ctx = make_ctx(g, command);
    auto rows = load_rows(ctx, a.input);
    if (rows.empty()) throw InputError("no records in " + a.input);
    auto samples = parse_rows<RagSample>(rows, [](const nlohmann::json& j, size_t i) {
        return rag_from_json(j, i);
    });

    std::string model = a.model.empty() ? ctx.config.defaults.model : a.model;
    std::vector<nlohmann::json> out(samples.size());
    std::vector<std::optional<std::string>> failures;
    for_each_sample(ctx, samples.size(), failures, [&](size_t i) {
        const auto& s = samples[i];
        std::string response =
            ctx.gateway->complete(model, build_rag_prompt(s.question, s.claims)).text;
        if (a.metric == "em") {
            double em = em_recall(response, s.answer_groups);
            out[i] = {{"id", s.id}, {"em", em}, {"response", response}};
        } else {
            auto preds = parse_answer_list(response);
            auto m = qampari_metrics(preds, s.answer_groups, a.k);
            out[i] = {{"id", s.id},
                      {"precision", m.precision},
                      {"recall_at_k", m.recall_at_k},
                      {"f1_at_k", m.f1_at_k},
                      {"response", response}};
        }
    });
    for (size_t i = 0; i < samples.size(); ++i)
        if (failures[i]) fail_sample(ctx, samples[i].id, "ragqa", *failures[i]);

    write_rows(ctx, "qa_scores.jsonl", out);
    auto column = [&](const char* key) {
        std::vector<double> v;
        for (const auto& r : out)
            if (!r.is_null()) v.push_back(r.at(key).get<double>());
        return v;
    };
    nlohmann::json groups = nlohmann::json::object();
    if (a.metric == "em") {
        auto v = column("em");
        if (!v.empty()) groups["em"] = metric_summary_json("em_recall", v, 1000, ctx.seed);
    } else {
        for (const char* key : {"precision", "recall_at_k", "f1_at_k"}) {
            auto v = column(key);
            if (!v.empty()) groups[key] = metric_summary_json(key, v, 1000, ctx.seed);
        }
    }
    if (!groups.empty()) emit_report_files(ctx, nlohmann::json{{"groups", groups}});
    return finish(ctx);
}

// ---------- validate ----------

struct ValidateArgs {
    std::string tasks;
    bool check_contradictions = false;
    std::string verifier;
};

int cmd_validate(const GlobalArgs& g, const ValidateArgs& a, const std::string& command) {
    Ctx ctx = make_ctx(g, command);
    auto tasks = load_tasks(a.tasks);
    ctx.manifest.add_input(a.tasks);
    if (tasks.empty()) throw InputError("no tasks in " + a.tasks);

    ValidateOptions options;
    options.check_contradictions = a.check_contradictions;
    std::string verifier = a.verifier.empty() ? ctx.config.defaults.verifier : a.verifier;
    if (a.check_contradictions) {
        options.judge = [&ctx, verifier](const std::string& ca,
                                         const std::string& cb) -> std::optional<bool> {
            std::string prompt(prompts::kContradictionTemplate);
            prompt = replace_all(std::move(prompt), "{a}", ca);
            prompt = replace_all(std::move(prompt), "{b}", cb);
            std::string reply = ctx.gateway->complete(verifier, prompt).text;
            for (const auto& raw : split_lines(reply)) {
                std::string line = trim(raw);
                if (line.empty()) continue;
                if (starts_with_icase(line, "yes")) return true;
                if (starts_with_icase(line, "no")) return false;
                return std::nullopt;
            }
            return std::nullopt;
        };
    }

    std::vector<nlohmann::json> out(tasks.size());
    std::vector<std::optional<std::string>> failures;
    size_t with_violations = 0;
    std::mutex mu;
    for_each_sample(ctx, tasks.size(), failures, [&](size_t i) {
        auto report = validate_claim_set(tasks[i].claims, options);
        nlohmann::json violations = nlohmann::json::array();
        for (const auto& v : report.violations) {
            violations.push_back({{"kind", to_string(v.kind)},
                                  {"claim_ids", v.claim_ids},
                                  {"detail", v.detail}});
        }
        out[i] = {{"task_id", tasks[i].id},
                  {"ok", report.ok()},
                  {"violations", std::move(violations)},
                  {"warnings", report.warnings}};
        if (!report.ok()) {
            std::lock_guard<std::mutex> lock(mu);
            ++with_violations;
        }
    });
    for (size_t i = 0; i < tasks.size(); ++i)
        if (failures[i]) fail_sample(ctx, tasks[i].id, "validate", *failures[i]);

    write_rows(ctx, "validation.jsonl", out);
    std::cout << with_violations << " of " << tasks.size() << " task(s) had violations\n";
    return finish(ctx);
}

// ---------- report ----------

struct ReportArgs {
    std::string scores;
    size_t replicates = 1000;
};

int cmd_report(const GlobalArgs& g, const ReportArgs& a, const std::string& command) {
    Ctx ctx = make_ctx(g, command);
    auto rows = load_rows(ctx, a.scores);
    if (rows.empty()) throw InputError("no scores in " + a.scores);
    auto scored = parse_rows<ScoreRow>(rows, [](const nlohmann::json& j, size_t i) {
        ScoreRow row;
        row.task_id = j.contains("task_id") ? j.at("task_id").get<std::string>()
                                            : "s" + std::to_string(i + 1);
        row.mode = task_mode_from_string(j.value("mode", "full"));
        row.score = score_from_json(j);
        return row;
    });
    emit_report_files(ctx, eval_report_json(scored, a.replicates, ctx.seed));
    return finish(ctx);
}

std::string join_command(int argc, const char* const* argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += " ";
        out += argv[i];
    }
    return out;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Precise information control: claim-set evaluation, preference data, "
                 "self-verified generation"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Master seed for all randomness");
    auto* cache_opt =
        app.add_option("--cache-dir", g.cache_dir, "Response cache directory (empty disables)");
    app.add_option("--config", g.config_path, "JSON config with backend profiles")
        ->check(CLI::ExistingFile);
    app.add_option("--max-concurrency", g.max_concurrency, "Global in-flight request cap");
    app.add_option("--out", g.out_dir, "Output directory (default pic-out)");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "Generate and score responses for PIC tasks");
    eval->add_option("tasks", ea.tasks, "Task JSONL file")->required()->check(CLI::ExistingFile);
    eval->add_option("--model", ea.model, "Profile under test");
    eval->add_option("--extractor", ea.extractor, "Claim extraction profile");
    eval->add_option("--verifier", ea.verifier, "Claim verification profile");
    eval->add_option("--replicates", ea.replicates, "Bootstrap replicates");

    ConvertArgs ca;
    auto* convert = app.add_subcommand("convert", "Filter raw samples into SFT data");
    convert->add_option("raw", ca.raw, "Raw sample JSONL")->required()->check(CLI::ExistingFile);
    convert->add_option("--extractor", ca.extractor, "Claim extraction profile");
    convert->add_option("--verifier", ca.verifier, "Claim verification profile");

    ExtractArgs xa;
    auto* extract = app.add_subcommand("extract", "Extract claims from texts");
    extract->add_option("input", xa.input, "JSONL rows {\"id\",\"text\"}")
        ->required()
        ->check(CLI::ExistingFile);
    extract->add_option("--extractor", xa.extractor, "Claim extraction profile");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Verify claims against claim sets");
    verify->add_option("input", va.input, "JSONL rows {\"id\",\"claims\",\"against\"}")
        ->required()
        ->check(CLI::ExistingFile);
    verify->add_option("--verifier", va.verifier, "Claim verification profile");

    PrefArgs pa;
    auto* prefdata = app.add_subcommand("prefdata", "Build preference tuples from SFT samples");
    prefdata->add_option("sft", pa.sft, "SFT sample JSONL")->required()->check(CLI::ExistingFile);
    prefdata->add_option("--sft-profile", pa.sft_profile, "Generation profile (theta_SFT)");
    prefdata->add_option("--ref-profile", pa.ref_profile, "Scoring profile (theta_Ref)");
    prefdata->add_option("--tau", pa.tau, "Drop-score threshold (default 0.5 full, 0.3 partial)");
    prefdata->add_option("--p-min", pa.p_min, "Min removal fraction");
    prefdata->add_option("--p-max", pa.p_max, "Max removal fraction");
    prefdata->add_option("--last-l", pa.last_l, "Tokens scored from the end");

    PipelineArgs la;
    auto* pipeline = app.add_subcommand("pipeline", "Run the 4-step self-verification pipeline");
    pipeline->add_option("input", la.input, "Pipeline input JSONL")->check(CLI::ExistingFile);
    pipeline->add_flag("--birthplace-tasks", la.birthplace_tasks,
                       "Generate the occupation x location task list");
    pipeline->add_option("--draft", la.draft, "Draft profile");
    pipeline->add_option("--verify-profile", la.verify, "Answer/judge profile");
    pipeline->add_option("--final", la.final_profile, "Final generation profile");
    pipeline->add_option("--k-samples", la.k_samples, "Self-consistency samples");
    pipeline->add_option("--vote-threshold", la.vote_threshold, "TRUE votes needed");
    pipeline->add_option("--verify-temperature", la.verify_temperature, "Sampling temperature");
    pipeline->add_option("--style", la.style, "Style suffix, e.g. humorous");
    pipeline->add_flag("--check-evidence", la.check_evidence,
                       "Score final responses against retrieved evidence");
    pipeline->add_option("--evidence", la.evidence, "Evidence provider id");
    pipeline->add_option("--evidence-extractor", la.evidence_extractor,
                         "Extractor for evidence checks");
    pipeline->add_option("--evidence-judge", la.evidence_judge, "Judge for evidence checks");

    RagArgs ra;
    auto* ragqa = app.add_subcommand("ragqa", "Score RAG QA outputs (EM or QAMPARI)");
    ragqa->add_option("input", ra.input, "RAG QA JSONL")->required()->check(CLI::ExistingFile);
    ragqa->add_option("--model", ra.model, "Profile under test");
    ragqa->add_option("--metric", ra.metric, "em | qampari")
        ->check(CLI::IsMember({"em", "qampari"}));
    ragqa->add_option("--k", ra.k, "Recall cap for qampari");

    ValidateArgs da;
    auto* validate = app.add_subcommand("validate", "Validate task claim sets");
    validate->add_option("tasks", da.tasks, "Task JSONL file")
        ->required()
        ->check(CLI::ExistingFile);
    validate->add_flag("--check-contradictions", da.check_contradictions,
                       "Run pairwise contradiction checks");
    validate->add_option("--verifier", da.verifier, "Judge profile for contradictions");

    ReportArgs ta;
    auto* report = app.add_subcommand("report", "Re-aggregate an existing score file");
    report->add_option("scores", ta.scores, "scores.jsonl from eval")
        ->required()
        ->check(CLI::ExistingFile);
    report->add_option("--replicates", ta.replicates, "Bootstrap replicates");

    std::string command = join_command(argc, argv);
    int rc = 0;
    // Callbacks fire inside parse(), so flag presence must be read there too.
    auto sync = [&] {
        g.seed_set = seed_opt->count() > 0;
        g.cache_dir_set = cache_opt->count() > 0;
    };
    eval->callback([&] { sync(); rc = cmd_eval(g, ea, command); });
    convert->callback([&] { sync(); rc = cmd_convert(g, ca, command); });
    extract->callback([&] { sync(); rc = cmd_extract(g, xa, command); });
    verify->callback([&] { sync(); rc = cmd_verify(g, va, command); });
    prefdata->callback([&] { sync(); rc = cmd_prefdata(g, pa, command); });
    pipeline->callback([&] { sync(); rc = cmd_pipeline(g, la, command); });
    ragqa->callback([&] { sync(); rc = cmd_ragqa(g, ra, command); });
    validate->callback([&] { sync(); rc = cmd_validate(g, da, command); });
    report->callback([&] { sync(); rc = cmd_report(g, ta, command); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}

} // namespace pic::cli
