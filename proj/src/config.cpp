#include "proofjudge/config.hpp"

#include "proofjudge/errors.hpp"
#include "proofjudge/jsonl.hpp"
#include "proofjudge/run_output.hpp"

namespace proofjudge {

namespace {

ModelEndpoint endpoint_from_json(const nlohmann::json& obj) {
    ModelEndpoint endpoint;
    endpoint.base_url = obj.at("base_url").get<std::string>();
    endpoint.model_id = obj.at("model_id").get<std::string>();
    endpoint.reasoning_effort =
        reasoning_effort_from_string(obj.value("reasoning_effort", "none"));
    endpoint.temperature = obj.value("temperature", 1.0);
    endpoint.max_tokens = obj.value("max_tokens", 16384);
    endpoint.auth_env_var = obj.value("auth_env_var", "");
    endpoint.max_attempts = obj.value("max_attempts", 4);
    endpoint.backoff_base_ms = obj.value("backoff_base_ms", 250);
    endpoint.requests_per_minute = obj.value("requests_per_minute", 0);
    return endpoint;
}

nlohmann::json endpoint_to_json(const ModelEndpoint& endpoint) {
    return {
        {"base_url", endpoint.base_url},
        {"model_id", endpoint.model_id},
        {"reasoning_effort", to_string(endpoint.reasoning_effort)},
        {"temperature", endpoint.temperature},
        {"max_tokens", endpoint.max_tokens},
        {"auth_env_var", endpoint.auth_env_var},
        {"max_attempts", endpoint.max_attempts},
        {"backoff_base_ms", endpoint.backoff_base_ms},
        {"requests_per_minute", endpoint.requests_per_minute},
    };
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& doc) {
    ExperimentConfig config;
    if (doc.contains("dataset")) {
        const auto& ds = doc.at("dataset");
        config.dataset_path = ds.at("path").get<std::string>();
        std::string format = ds.value("format", "jsonl");
        if (format != "jsonl") throw ConfigError("unknown dataset format: " + format);
    }
    if (doc.contains("label_policy")) {
        config.label_policy.correct_min_score =
            doc.at("label_policy").value("correct_min_score", 7);
    }
    if (config.label_policy.correct_min_score < 1 ||
        config.label_policy.correct_min_score > 7) {
        throw ConfigError("label_policy.correct_min_score must be in 1..7");
    }
    config.bundle_dir = doc.value("bundle", std::string("bundles/default"));
    if (doc.contains("subset")) {
        SubsetSpec subset;
        subset.n_incorrect = doc.at("subset").at("n_incorrect").get<std::size_t>();
        subset.n_correct = doc.at("subset").at("n_correct").get<std::size_t>();
        config.subset = subset;
    }

    if (doc.contains("plan")) {
        const auto& plan = doc.at("plan");
        if (plan.is_string()) {
            config.plan_preset = plan.get<std::string>();
        } else if (plan.is_object() && plan.contains("calls")) {
            for (const auto& call : plan.at("calls")) {
                config.plan_calls.push_back(CallSpec{
                    call.at("prompt_id").get<std::string>(), call.value("num_calls", 1)});
            }
        } else {
            throw ConfigError("plan must be a preset name or {\"calls\": [...]}");
        }
    }
    if (doc.contains("aggregation")) {
        config.aggregation = aggregation_rule_from_json(doc.at("aggregation"));
    }

    if (doc.contains("backend")) {
        const auto& backend = doc.at("backend");
        int sources = 0;
        if (backend.contains("endpoint")) {
            config.backend.endpoint = endpoint_from_json(backend.at("endpoint"));
            ++sources;
        }
        if (backend.contains("simulator")) {
            const auto& sim = backend.at("simulator");
            SimulatedJudgeParams params;
            params.tpr = sim.at("tpr").get<double>();
            params.tnr = sim.at("tnr").get<double>();
            params.seed = sim.value("seed", 0ULL);
            config.backend.simulator = params;
            ++sources;
        }
        if (backend.contains("fixtures")) {
            config.backend.fixtures = backend.at("fixtures").get<std::string>();
            ++sources;
        }
        if (sources != 1) {
            throw ConfigError("backend must specify exactly one of endpoint, simulator, "
                              "fixtures; got " + std::to_string(sources));
        }
    }

    config.replicates = doc.value("replicates", 1);
    config.parallelism = doc.value("parallelism", 4);
    config.seed = doc.value("seed", 0ULL);
    config.cache_dir = doc.value("cache_dir", std::string(""));
    config.output_dir = doc.value("output_dir", std::string("runs"));
    config.unparseable_retries = doc.value("unparseable_retries", 1);
    config.final_policy = unparseable_final_policy_from_string(
        doc.value("unparseable_final_policy", "as_incorrect_prediction"));
    if (config.replicates < 1) throw ConfigError("replicates must be >= 1");
    if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    return config;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
    nlohmann::json doc;
    doc["dataset"] = {{"path", config.dataset_path.string()}, {"format", "jsonl"}};
    doc["label_policy"] = {{"correct_min_score", config.label_policy.correct_min_score}};
    doc["bundle"] = config.bundle_dir.string();
    if (config.subset) {
        doc["subset"] = {{"n_incorrect", config.subset->n_incorrect},
                         {"n_correct", config.subset->n_correct}};
    }
    if (!config.plan_preset.empty()) {
        doc["plan"] = config.plan_preset;
    } else if (!config.plan_calls.empty()) {
        nlohmann::json calls = nlohmann::json::array();
        for (const auto& call : config.plan_calls) {
            calls.push_back({{"prompt_id", call.prompt_id}, {"num_calls", call.num_calls}});
        }
        doc["plan"] = {{"calls", calls}};
    }
    if (config.aggregation) doc["aggregation"] = aggregation_rule_to_json(*config.aggregation);

    nlohmann::json backend;
    if (config.backend.endpoint) backend["endpoint"] = endpoint_to_json(*config.backend.endpoint);
    if (config.backend.simulator) {
        backend["simulator"] = {{"tpr", config.backend.simulator->tpr},
                                {"tnr", config.backend.simulator->tnr},
                                {"seed", config.backend.simulator->seed}};
    }
    if (config.backend.fixtures) backend["fixtures"] = config.backend.fixtures->string();
    doc["backend"] = backend;

    doc["replicates"] = config.replicates;
    doc["parallelism"] = config.parallelism;
    doc["seed"] = config.seed;
    doc["cache_dir"] = config.cache_dir.string();
    doc["output_dir"] = config.output_dir.string();
    doc["unparseable_retries"] = config.unparseable_retries;
    doc["unparseable_final_policy"] = to_string(config.final_policy);
    return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    nlohmann::json doc = nlohmann::json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ConfigError("config file is not a JSON object: " + path.string());
    }
    // Run manifests embed the config verbatim; accept them directly.
    if (doc.contains("config") && doc.at("config").is_object()) {
        return config_from_json(doc.at("config"));
    }
    return config_from_json(doc);
}

ResolvedPlan resolve_plan(const ExperimentConfig& config, const PromptBundle& bundle) {
    ResolvedPlan resolved;
    if (!config.plan_preset.empty()) {
        const std::string& preset = config.plan_preset;
        if (preset == "paper-ensemble") {
            const PromptSpec* general = nullptr;
            std::vector<const PromptSpec*> specialists;
            for (const auto& prompt : bundle.prompts) {
                if (prompt.role == PromptRole::EnsembleGeneral) general = &prompt;
                if (prompt.role == PromptRole::EnsembleSpecialist) {
                    specialists.push_back(&prompt);
                }
            }
            if (!general) {
                throw ConfigError("bundle has no ensemble-general prompt; cannot expand "
                                  "paper-ensemble");
            }
            resolved.plan.calls.push_back({general->id, general->default_repetitions});
            for (const auto* specialist : specialists) {
                resolved.plan.calls.push_back(
                    {specialist->id, specialist->default_repetitions});
            }
            resolved.rule.kind = AggregationKind::ThresholdVote;
            resolved.rule.accept_threshold = 8;
            resolved.rule.unparseable_policy = UnparseablePolicy::AsIncorrectVote;
        } else if (preset == "imobench" || preset == "gimo" || preset == "proofbench7pt") {
            bundle.get(preset);  // unknown-id error surfaces here
            resolved.plan.calls.push_back({preset, 1});
            resolved.rule.kind = AggregationKind::Single;
        } else {
            throw ConfigError("unknown plan preset: " + preset);
        }
        // An explicit aggregation block overrides the preset's rule.
        if (config.aggregation) resolved.rule = *config.aggregation;
    } else {
        if (config.plan_calls.empty()) {
            throw ConfigError("config has neither a plan preset nor inline calls");
        }
        resolved.plan.calls = config.plan_calls;
        if (config.aggregation) {
            resolved.rule = *config.aggregation;
        } else if (resolved.plan.total_calls() == 1) {
            resolved.rule.kind = AggregationKind::Single;
        } else {
            throw ConfigError("multi-call plans need an explicit aggregation rule");
        }
        for (const auto& call : resolved.plan.calls) bundle.get(call.prompt_id);
    }
    resolved.plan.validate();
    return resolved;
}

std::unique_ptr<JudgeBackend> make_backend(const BackendConfig& config) {
    int sources = (config.endpoint ? 1 : 0) + (config.simulator ? 1 : 0) +
                  (config.fixtures ? 1 : 0);
    if (sources != 1) {
        throw ConfigError("exactly one backend source must be configured, got " +
                          std::to_string(sources));
    }
    if (config.endpoint) return std::make_unique<HttpChatBackend>(*config.endpoint);
    if (config.simulator) return std::make_unique<SimulatorBackend>(*config.simulator);
    return std::make_unique<ScriptedBackend>(ScriptedBackend::from_jsonl(*config.fixtures));
}

}  // namespace proofjudge
