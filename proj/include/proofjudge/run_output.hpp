#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "proofjudge/engine.hpp"
#include "proofjudge/prompts.hpp"
#include "proofjudge/scoring.hpp"

namespace proofjudge {

nlohmann::json judgment_to_json(const JudgmentRecord& judgment);
JudgmentRecord judgment_from_json(const nlohmann::json& obj);
void save_judgments(const std::filesystem::path& path,
                    const std::vector<JudgmentRecord>& judgments);
std::vector<JudgmentRecord> load_judgments(const std::filesystem::path& path);

nlohmann::json plan_to_json(const EnsemblePlan& plan);
EnsemblePlan plan_from_json(const nlohmann::json& arr);
nlohmann::json aggregation_rule_to_json(const AggregationRule& rule);
AggregationRule aggregation_rule_from_json(const nlohmann::json& obj);

nlohmann::json report_to_json(const MetricsReport& report);

/// One row per replicate plus a summary row (BA mean/min/max and the
/// self-consistency rate).
std::string report_to_csv(const MetricsReport& report);

/// Per-prompt standalone FPR/FNR table: prompt,fpr,fnr.
std::string per_prompt_csv(const MetricsReport& report);

/// Plot rows, one per prompt plus one for the aggregated plan:
/// model_config,prompt_or_ensemble,dataset,ba_mean,ba_min,ba_max,sc,fpr_mean,fnr_mean.
std::string plot_data_csv(const MetricsReport& report, const std::string& model_config,
                          const std::string& dataset_name);

/// Writes a complete run directory: judgments.jsonl, manifest.json,
/// report.json/.csv, per_prompt.csv, plot_data.csv. Every file except the
/// manifest (which carries created_at) is byte-deterministic for identical
/// inputs.
void write_run_outputs(const std::filesystem::path& dir, const nlohmann::json& config_json,
                       const EnsemblePlan& plan, const AggregationRule& rule,
                       const PromptBundle& bundle, const std::string& model_config,
                       const std::string& dataset_name, std::uint64_t seed,
                       const std::vector<JudgmentRecord>& judgments,
                       const MetricsReport& report);

}  // namespace proofjudge
