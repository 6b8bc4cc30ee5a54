#include "proofjudge/run_output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "proofjudge/errors.hpp"
#include "proofjudge/jsonl.hpp"

namespace proofjudge {

namespace {

std::string csv_num(double value) {
    if (std::isnan(value)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

std::string iso8601_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double mean_of(const std::vector<ReplicateMetrics>& metrics, double ReplicateMetrics::* field) {
    double sum = 0;
    for (const auto& m : metrics) sum += m.*field;
    return metrics.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : sum / static_cast<double>(metrics.size());
}

}  // namespace

nlohmann::json judgment_to_json(const JudgmentRecord& j) {
    return {
        {"record_id", j.record_id},
        {"prompt_id", j.prompt_id},
        {"replicate", j.replicate},
        {"call_index", j.call_index},
        {"verdict", to_string(j.verdict)},
        {"raw_ref", j.raw_ref},
        {"prompt_tokens", j.prompt_tokens},
        {"completion_tokens", j.completion_tokens},
        {"failed", j.failed},
    };
}

JudgmentRecord judgment_from_json(const nlohmann::json& obj) {
    JudgmentRecord j;
    j.record_id = obj.at("record_id").get<std::string>();
    j.prompt_id = obj.at("prompt_id").get<std::string>();
    j.replicate = obj.at("replicate").get<int>();
    j.call_index = obj.at("call_index").get<int>();
    j.verdict = verdict_from_string(obj.at("verdict").get<std::string>());
    j.raw_ref = obj.value("raw_ref", "");
    j.prompt_tokens = obj.value("prompt_tokens", 0L);
    j.completion_tokens = obj.value("completion_tokens", 0L);
    j.failed = obj.value("failed", false);
    return j;
}

void save_judgments(const std::filesystem::path& path,
                    const std::vector<JudgmentRecord>& judgments) {
    std::vector<nlohmann::json> objects;
    objects.reserve(judgments.size());
    for (const auto& j : judgments) objects.push_back(judgment_to_json(j));
    write_jsonl(path, objects);
}

std::vector<JudgmentRecord> load_judgments(const std::filesystem::path& path) {
    std::vector<JudgmentRecord> judgments;
    for_each_jsonl(path, [&](std::size_t line_no, const nlohmann::json& obj) {
        try {
            judgments.push_back(judgment_from_json(obj));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.filename().string() + " line " + std::to_string(line_no) +
                            ": " + e.what());
        }
    });
    return judgments;
}

nlohmann::json plan_to_json(const EnsemblePlan& plan) {
    nlohmann::json calls = nlohmann::json::array();
    for (const auto& call : plan.calls) {
        calls.push_back({{"prompt_id", call.prompt_id}, {"num_calls", call.num_calls}});
    }
    return calls;
}

EnsemblePlan plan_from_json(const nlohmann::json& arr) {
    EnsemblePlan plan;
    for (const auto& call : arr) {
        plan.calls.push_back(
            CallSpec{call.at("prompt_id").get<std::string>(), call.value("num_calls", 1)});
    }
    plan.validate();
    return plan;
}

nlohmann::json aggregation_rule_to_json(const AggregationRule& rule) {
    nlohmann::json obj = {{"kind", to_string(rule.kind)},
                          {"unparseable_policy", to_string(rule.unparseable_policy)}};
    if (rule.kind == AggregationKind::ThresholdVote) {
        obj["accept_threshold"] = rule.accept_threshold;
    }
    return obj;
}

AggregationRule aggregation_rule_from_json(const nlohmann::json& obj) {
    AggregationRule rule;
    rule.kind = aggregation_kind_from_string(obj.at("kind").get<std::string>());
    if (rule.kind == AggregationKind::ThresholdVote) {
        rule.accept_threshold = obj.at("accept_threshold").get<int>();
    }
    rule.unparseable_policy =
        unparseable_policy_from_string(obj.value("unparseable_policy", "as_incorrect_vote"));
    return rule;
}

nlohmann::json report_to_json(const MetricsReport& report) {
    nlohmann::json per_replicate = nlohmann::json::array();
    for (const auto& m : report.per_replicate) {
        per_replicate.push_back({
            {"tp", m.counts.tp},
            {"fn", m.counts.fn},
            {"tn", m.counts.tn},
            {"fp", m.counts.fp},
            {"tpr", m.tpr},
            {"tnr", m.tnr},
            {"fpr", m.fpr},
            {"fnr", m.fnr},
            {"balanced_accuracy", m.balanced_accuracy},
        });
    }
    nlohmann::json per_prompt = nlohmann::json::array();
    for (const auto& p : report.per_prompt) {
        per_prompt.push_back({
            {"prompt_id", p.prompt_id},
            {"n_samples", p.n_samples},
            {"ba_mean", p.ba_mean},
            {"ba_min", p.ba_min},
            {"ba_max", p.ba_max},
            {"fpr_mean", p.fpr_mean},
            {"fnr_mean", p.fnr_mean},
            {"self_consistency", p.self_consistency},
        });
    }
    return {
        {"positive_class", "proof is incorrect"},
        {"n_records", report.n_records},
        {"n_replicates", report.n_replicates},
        {"ba_mean", report.ba_mean},
        {"ba_min", report.ba_min},
        {"ba_max", report.ba_max},
        {"self_consistency_rate", report.self_consistency_rate},
        {"sc_prefix", report.sc_prefix},
        {"per_replicate", per_replicate},
        {"per_prompt", per_prompt},
    };
}

std::string report_to_csv(const MetricsReport& report) {
    std::ostringstream out;
    out << "row,replicate,tp,fn,tn,fp,tpr,tnr,fpr,fnr,balanced_accuracy,"
           "ba_mean,ba_min,ba_max,self_consistency\n";
    for (std::size_t rep = 0; rep < report.per_replicate.size(); ++rep) {
        const auto& m = report.per_replicate[rep];
        out << "replicate," << rep << ',' << m.counts.tp << ',' << m.counts.fn << ','
            << m.counts.tn << ',' << m.counts.fp << ',' << csv_num(m.tpr) << ','
            << csv_num(m.tnr) << ',' << csv_num(m.fpr) << ',' << csv_num(m.fnr) << ','
            << csv_num(m.balanced_accuracy) << ",,,,\n";
    }
    out << "summary,,,,,,,,,,," << csv_num(report.ba_mean) << ',' << csv_num(report.ba_min)
        << ',' << csv_num(report.ba_max) << ',' << csv_num(report.self_consistency_rate)
        << '\n';
    return out.str();
}

std::string per_prompt_csv(const MetricsReport& report) {
    std::ostringstream out;
    out << "prompt,fpr,fnr\n";
    for (const auto& p : report.per_prompt) {
        out << p.prompt_id << ',' << csv_num(p.fpr_mean) << ',' << csv_num(p.fnr_mean)
            << '\n';
    }
    return out.str();
}

std::string plot_data_csv(const MetricsReport& report, const std::string& model_config,
                          const std::string& dataset_name) {
    std::ostringstream out;
    out << "model_config,prompt_or_ensemble,dataset,ba_mean,ba_min,ba_max,sc,"
           "fpr_mean,fnr_mean\n";
    for (const auto& p : report.per_prompt) {
        out << model_config << ',' << p.prompt_id << ',' << dataset_name << ','
            << csv_num(p.ba_mean) << ',' << csv_num(p.ba_min) << ',' << csv_num(p.ba_max)
            << ',' << csv_num(p.self_consistency) << ',' << csv_num(p.fpr_mean) << ','
            << csv_num(p.fnr_mean) << '\n';
    }
    out << model_config << ",ensemble," << dataset_name << ',' << csv_num(report.ba_mean)
        << ',' << csv_num(report.ba_min) << ',' << csv_num(report.ba_max) << ','
        << csv_num(report.self_consistency_rate) << ','
        << csv_num(mean_of(report.per_replicate, &ReplicateMetrics::fpr)) << ','
        << csv_num(mean_of(report.per_replicate, &ReplicateMetrics::fnr)) << '\n';
    return out.str();
}

void write_run_outputs(const std::filesystem::path& dir, const nlohmann::json& config_json,
                       const EnsemblePlan& plan, const AggregationRule& rule,
                       const PromptBundle& bundle, const std::string& model_config,
                       const std::string& dataset_name, std::uint64_t seed,
                       const std::vector<JudgmentRecord>& judgments,
                       const MetricsReport& report) {
    std::filesystem::create_directories(dir);

    nlohmann::json checksums = nlohmann::json::object();
    for (const auto& [id, sha] : bundle.checksums) checksums[id] = sha;
    nlohmann::json manifest = {
        {"schema_version", 1},
        {"created_at", iso8601_now()},  // the only timestamp in a run directory
        {"config", config_json},
        {"plan", plan_to_json(plan)},
        {"aggregation", aggregation_rule_to_json(rule)},
        {"bundle", {{"name", bundle.name}, {"checksums", checksums}}},
        {"model", model_config},
        {"dataset", dataset_name},
        {"seed", seed},
    };
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

    save_judgments(dir / "judgments.jsonl", judgments);
    write_file_atomic(dir / "report.json", report_to_json(report).dump(2) + "\n");
    write_file_atomic(dir / "report.csv", report_to_csv(report));
    write_file_atomic(dir / "per_prompt.csv", per_prompt_csv(report));
    write_file_atomic(dir / "plot_data.csv",
                      plot_data_csv(report, model_config, dataset_name));
}

}  // namespace proofjudge
