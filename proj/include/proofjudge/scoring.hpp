#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "proofjudge/verdict.hpp"

namespace proofjudge {

struct EnsemblePlan;
struct JudgmentRecord;

enum class AggregationKind { Single, ThresholdVote };
enum class UnparseablePolicy { AsIncorrectVote, DropCall };
enum class UnparseableFinalPolicy { AsIncorrectPrediction, Exclude };

std::string to_string(AggregationKind kind);
AggregationKind aggregation_kind_from_string(const std::string& s);
std::string to_string(UnparseablePolicy policy);
UnparseablePolicy unparseable_policy_from_string(const std::string& s);
std::string to_string(UnparseableFinalPolicy policy);
UnparseableFinalPolicy unparseable_final_policy_from_string(const std::string& s);

/// Vote-to-verdict rule. The shipped paper rule is threshold_vote with
/// accept_threshold 8 over 12 calls, unparseables counted as Incorrect votes.
struct AggregationRule {
    AggregationKind kind = AggregationKind::Single;
    int accept_threshold = 1;
    UnparseablePolicy unparseable_policy = UnparseablePolicy::AsIncorrectVote;
};

/// Combines the verdicts of one (record, replicate) into a final verdict.
/// `plan_total_calls` is the expected vote count; a mismatch is an error.
/// Threshold voting accepts iff the Correct-vote count reaches the
/// threshold; under drop_call the threshold is rescaled to
/// ceil(tau * effective / total) over the non-unparseable votes.
Verdict aggregate(std::span<const Verdict> verdicts, const AggregationRule& rule,
                  int plan_total_calls);

/// Confusion counts under the positive class "proof is incorrect":
///   tp = incorrect proof judged Incorrect    (error caught)
///   fn = incorrect proof judged Correct      (flawed proof accepted)
///   tn = correct proof judged Correct
///   fp = correct proof judged Incorrect      (correct proof rejected)
struct ConfusionCounts {
    long tp = 0;
    long fn = 0;
    long tn = 0;
    long fp = 0;
};

/// Tallies final verdicts against ground-truth labels (true = proof correct).
ConfusionCounts confusion(const std::map<std::string, Verdict>& final_verdicts,
                          const std::map<std::string, bool>& labels,
                          UnparseableFinalPolicy policy =
                              UnparseableFinalPolicy::AsIncorrectPrediction);

/// (TPR + TNR) / 2. Throws MetricError when either class is empty.
double balanced_accuracy(const ConfusionCounts& counts);

/// Fraction of records whose R verdicts are all identical. Unparseable is
/// its own category: it breaks unanimity with any other verdict.
double self_consistency(const std::map<std::string, std::vector<Verdict>>& per_record);

/// Per-replicate metrics. Rates are NaN when the corresponding class is
/// empty (balanced_accuracy, called directly, throws instead).
struct ReplicateMetrics {
    ConfusionCounts counts;
    double tpr = 0, tnr = 0, fpr = 0, fnr = 0;
    double balanced_accuracy = 0;
};

/// Standalone single-call metrics for one prompt, pooled over its
/// replicate x call samples.
struct PromptBreakdown {
    std::string prompt_id;
    int n_samples = 0;  // replicates x calls of this prompt
    double ba_mean = 0, ba_min = 0, ba_max = 0;
    double fpr_mean = 0, fnr_mean = 0;
    double self_consistency = 0;  // unanimity across all samples of this prompt
};

struct MetricsReport {
    std::vector<ReplicateMetrics> per_replicate;
    double ba_mean = 0, ba_min = 0, ba_max = 0;
    double self_consistency_rate = 0;
    std::size_t n_records = 0;
    int n_replicates = 0;
    /// self-consistency over replicate prefixes k=1..R (non-increasing).
    std::vector<double> sc_prefix;
    std::vector<PromptBreakdown> per_prompt;
};

/// Final verdict per record per replicate, aggregated under `rule`.
/// Validates that judgments cover exactly (records x plan x replicates).
std::map<std::string, std::vector<Verdict>> final_verdicts(
    const std::vector<JudgmentRecord>& judgments, const EnsemblePlan& plan,
    const AggregationRule& rule, int replicates);

/// Full report: per-replicate confusion/BA, BA summary across replicates,
/// self-consistency over aggregated verdicts, and per-prompt standalone
/// breakdown.
MetricsReport build_report(const std::vector<JudgmentRecord>& judgments,
                           const EnsemblePlan& plan, const AggregationRule& rule,
                           const std::map<std::string, bool>& labels, int replicates,
                           UnparseableFinalPolicy final_policy =
                               UnparseableFinalPolicy::AsIncorrectPrediction);

}  // namespace proofjudge
