#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "proofjudge/backends.hpp"
#include "proofjudge/dataset.hpp"
#include "proofjudge/engine.hpp"
#include "proofjudge/prompts.hpp"
#include "proofjudge/scoring.hpp"

namespace proofjudge {

/// Exactly one of endpoint / simulator / fixtures must be set.
struct BackendConfig {
    std::optional<ModelEndpoint> endpoint;
    std::optional<SimulatedJudgeParams> simulator;
    std::optional<std::filesystem::path> fixtures;
};

/// Balanced class subsetting applied after loading (counts are of derived
/// labels, sampled with the config seed).
struct SubsetSpec {
    std::size_t n_incorrect = 0;
    std::size_t n_correct = 0;
};

/// One experiment: dataset, labeling, plan, aggregation, backend, and run
/// parameters. Serialized verbatim into run manifests.
struct ExperimentConfig {
    std::filesystem::path dataset_path;
    DatasetFormat dataset_format = DatasetFormat::Jsonl;
    LabelPolicy label_policy;
    std::optional<SubsetSpec> subset;
    std::filesystem::path bundle_dir = "bundles/default";
    /// "paper-ensemble", "imobench", "gimo", "proofbench7pt", or empty when
    /// `plan_calls` is given inline.
    std::string plan_preset;
    std::vector<CallSpec> plan_calls;
    std::optional<AggregationRule> aggregation;  // presets supply their own
    BackendConfig backend;
    int replicates = 1;
    int parallelism = 4;
    std::uint64_t seed = 0;
    std::filesystem::path cache_dir;  // empty = caching disabled
    std::filesystem::path output_dir = "runs";
    int unparseable_retries = 1;
    UnparseableFinalPolicy final_policy = UnparseableFinalPolicy::AsIncorrectPrediction;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Loads a config file. A run manifest (a JSON object with a "config" key)
/// is accepted too, making every run replayable from its manifest.
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResolvedPlan {
    EnsemblePlan plan;
    AggregationRule rule;
};

/// Expands the preset (or the inline calls) against a loaded bundle.
/// "paper-ensemble" schedules the ensemble-general prompt at its default 5
/// repetitions plus every specialist once, with threshold 8 voting; the
/// three baseline presets are single-prompt, single-call plans.
ResolvedPlan resolve_plan(const ExperimentConfig& config, const PromptBundle& bundle);

std::unique_ptr<JudgeBackend> make_backend(const BackendConfig& config);

}  // namespace proofjudge
